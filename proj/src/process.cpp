#include "veracct/process.hpp"

#include <functional>
#include <set>

namespace veracct {

namespace {

ProcPtr make(Process::Kind k, std::function<void(Process&)> init) {
  auto p = std::make_shared<Process>();
  p->kind = k;
  init(*p);
  return p;
}

std::string args_str(const std::vector<Term>& ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + ts[i].str();
  return s;
}

}  // namespace

ProcPtr Process::nil(bool implicit) {
  return make(Kind::Nil, [&](Process& p) { p.implicit = implicit; });
}
ProcPtr Process::par(ProcPtr a, ProcPtr b) {
  return make(Kind::Par, [&](Process& p) {
    p.p = std::move(a);
    p.q = std::move(b);
  });
}
ProcPtr Process::repl(ProcPtr a) {
  return make(Kind::Repl, [&](Process& p) { p.p = std::move(a); });
}
ProcPtr Process::make_new(const Term& var, ProcPtr cont) {
  return make(Kind::New, [&](Process& p) {
    p.t1 = var;
    p.p = std::move(cont);
  });
}
ProcPtr Process::out(const Term& ch, const Term& msg, ProcPtr cont) {
  return make(Kind::Out, [&](Process& p) {
    p.t1 = ch;
    p.t2 = msg;
    p.p = std::move(cont);
  });
}
ProcPtr Process::in(const Term& ch, const Term& pattern, ProcPtr cont) {
  return make(Kind::In, [&](Process& p) {
    p.t1 = ch;
    p.t2 = pattern;
    p.p = std::move(cont);
  });
}
ProcPtr Process::cond_(Condition c, ProcPtr then_p, ProcPtr else_p) {
  return make(Kind::Cond, [&](Process& p) {
    p.cond = std::move(c);
    p.p = std::move(then_p);
    p.q = std::move(else_p);
  });
}
ProcPtr Process::event(const std::string& fact, std::vector<Term> args, ProcPtr cont) {
  return make(Kind::Event, [&](Process& p) {
    p.fact = fact;
    p.fact_args = std::move(args);
    p.p = std::move(cont);
  });
}
ProcPtr Process::choice(ProcPtr a, ProcPtr b) {
  return make(Kind::Choice, [&](Process& p) {
    p.p = std::move(a);
    p.q = std::move(b);
  });
}
ProcPtr Process::insert(const Term& key, const Term& value, ProcPtr cont) {
  return make(Kind::Insert, [&](Process& p) {
    p.t1 = key;
    p.t2 = value;
    p.p = std::move(cont);
  });
}
ProcPtr Process::remove(const Term& key, ProcPtr cont) {
  return make(Kind::Delete, [&](Process& p) {
    p.t1 = key;
    p.p = std::move(cont);
  });
}
ProcPtr Process::lookup(const Term& key, const Term& var, ProcPtr then_p, ProcPtr else_p) {
  return make(Kind::Lookup, [&](Process& p) {
    p.t1 = key;
    p.t2 = var;
    p.p = std::move(then_p);
    p.q = std::move(else_p);
  });
}
ProcPtr Process::lock(const Term& t, ProcPtr cont) {
  return make(Kind::Lock, [&](Process& p) {
    p.t1 = t;
    p.p = std::move(cont);
  });
}
ProcPtr Process::unlock(const Term& t, ProcPtr cont) {
  return make(Kind::Unlock, [&](Process& p) {
    p.t1 = t;
    p.p = std::move(cont);
  });
}
ProcPtr Process::tag(const std::string& owner, ProcPtr cont) {
  return make(Kind::Tag, [&](Process& p) {
    p.owner = owner;
    p.p = std::move(cont);
  });
}

const std::string& Process::str() const {
  std::call_once(text_once_, [this] {
    auto cont = [&](const ProcPtr& c) { return c->kind == Kind::Nil ? std::string() : "; " + c->str(); };
    switch (kind) {
      case Kind::Nil: text_ = "0"; break;
      case Kind::Par: text_ = "(" + p->str() + " | " + q->str() + ")"; break;
      case Kind::Repl: text_ = "!(" + p->str() + ")"; break;
      case Kind::New: text_ = "new " + t1.name() + "; " + p->str(); break;
      case Kind::Out: text_ = "out(" + t1.str() + ", " + t2.str() + ")" + cont(p); break;
      case Kind::In: text_ = "in(" + t1.str() + ", " + t2.str() + ")" + cont(p); break;
      case Kind::Cond:
        text_ = "if " + cond.predicate + "(" + args_str(cond.args) + ") then (" + p->str() + ") else (" +
                q->str() + ")";
        break;
      case Kind::Event: text_ = "event " + fact + "(" + args_str(fact_args) + ")" + cont(p); break;
      case Kind::Choice: text_ = "(" + p->str() + " + " + q->str() + ")"; break;
      case Kind::Insert: text_ = "insert " + t1.str() + ", " + t2.str() + cont(p); break;
      case Kind::Delete: text_ = "delete " + t1.str() + cont(p); break;
      case Kind::Lookup:
        text_ = "lookup " + t1.str() + " as " + t2.name() + " in (" + p->str() + ") else (" + q->str() + ")";
        break;
      case Kind::Lock: text_ = "lock " + t1.str() + cont(p); break;
      case Kind::Unlock: text_ = "unlock " + t1.str() + cont(p); break;
      case Kind::Tag: text_ = "{" + owner + "} " + p->str(); break;
    }
  });
  return text_;
}

ProcPtr substitute(const ProcPtr& p, const Substitution& s) {
  if (s.empty() || p->kind == Process::Kind::Nil) return p;
  auto n = std::make_shared<Process>();
  n->kind = p->kind;
  n->t1 = substitute(p->t1, s);
  n->t2 = substitute(p->t2, s);
  n->cond.predicate = p->cond.predicate;
  for (const auto& a : p->cond.args) n->cond.args.push_back(substitute(a, s));
  n->fact = p->fact;
  for (const auto& a : p->fact_args) n->fact_args.push_back(substitute(a, s));
  n->owner = p->owner;
  n->implicit = p->implicit;
  if (p->p) n->p = substitute(p->p, s);
  if (p->q) n->q = substitute(p->q, s);
  return n;
}

namespace {

void free_rec(const ProcPtr& p, std::set<std::string> bound, std::set<std::string>& out) {
  auto add = [&](const Term& t) {
    std::set<std::string> vs;
    collect_vars(t, vs);
    for (const auto& v : vs)
      if (!bound.count(v)) out.insert(v);
  };
  switch (p->kind) {
    case Process::Kind::Nil: return;
    case Process::Kind::New:
      bound.insert(p->t1.name());
      break;
    case Process::Kind::In: {
      add(p->t1);
      std::set<std::string> vs;
      collect_vars(p->t2, vs);
      bound.insert(vs.begin(), vs.end());
      break;
    }
    case Process::Kind::Lookup:
      add(p->t1);
      free_rec(p->q, bound, out);
      bound.insert(p->t2.name());
      free_rec(p->p, bound, out);
      return;
    default:
      add(p->t1);
      add(p->t2);
      for (const auto& a : p->cond.args) add(a);
      for (const auto& a : p->fact_args) add(a);
      break;
  }
  if (p->p) free_rec(p->p, bound, out);
  if (p->q) free_rec(p->q, bound, out);
}

}  // namespace

std::set<std::string> free_vars(const ProcPtr& p) {
  std::set<std::string> out;
  free_rec(p, {}, out);
  return out;
}

}  // namespace veracct
