#include "veracct/formula.hpp"

#include <algorithm>

namespace veracct {

namespace fm {

namespace {
FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}  // namespace

FormulaPtr falsum() { return make(Formula{}); }
FormulaPtr verum() {
  Formula f;
  f.kind = Formula::Kind::True;
  return make(std::move(f));
}
FormulaPtr action(const std::string& fact, std::vector<Term> args, const Term& time) {
  Formula f;
  f.kind = Formula::Kind::Action;
  f.fact = fact;
  f.args = std::move(args);
  f.lhs = time;
  return make(std::move(f));
}
FormulaPtr less(const Term& i, const Term& j) {
  Formula f;
  f.kind = Formula::Kind::Less;
  f.lhs = i;
  f.rhs = j;
  return make(std::move(f));
}
FormulaPtr eq_time(const Term& i, const Term& j) {
  Formula f;
  f.kind = Formula::Kind::EqTime;
  f.lhs = i;
  f.rhs = j;
  return make(std::move(f));
}
FormulaPtr eq_term(const Term& s, const Term& t) {
  Formula f;
  f.kind = Formula::Kind::EqTerm;
  f.lhs = s;
  f.rhs = t;
  return make(std::move(f));
}
FormulaPtr neg(FormulaPtr g) {
  Formula f;
  f.kind = Formula::Kind::Not;
  f.a = std::move(g);
  return make(std::move(f));
}
namespace {
FormulaPtr binary(Formula::Kind k, FormulaPtr x, FormulaPtr y) {
  Formula f;
  f.kind = k;
  f.a = std::move(x);
  f.b = std::move(y);
  return make(std::move(f));
}
FormulaPtr quant(Formula::Kind k, std::vector<Term> vars, FormulaPtr body) {
  if (vars.empty()) return body;
  Formula f;
  f.kind = k;
  f.vars = std::move(vars);
  f.a = std::move(body);
  return make(std::move(f));
}
}  // namespace
FormulaPtr conj(FormulaPtr x, FormulaPtr y) { return binary(Formula::Kind::And, std::move(x), std::move(y)); }
FormulaPtr disj(FormulaPtr x, FormulaPtr y) { return binary(Formula::Kind::Or, std::move(x), std::move(y)); }
FormulaPtr implies(FormulaPtr x, FormulaPtr y) {
  return binary(Formula::Kind::Implies, std::move(x), std::move(y));
}
FormulaPtr exists(std::vector<Term> vars, FormulaPtr body) {
  return quant(Formula::Kind::Exists, std::move(vars), std::move(body));
}
FormulaPtr forall(std::vector<Term> vars, FormulaPtr body) {
  return quant(Formula::Kind::Forall, std::move(vars), std::move(body));
}
FormulaPtr conj_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return verum();
  FormulaPtr acc = fs.back();
  for (std::size_t i = fs.size() - 1; i-- > 0;) acc = conj(fs[i], acc);
  return acc;
}
FormulaPtr disj_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return falsum();
  FormulaPtr acc = fs.back();
  for (std::size_t i = fs.size() - 1; i-- > 0;) acc = disj(fs[i], acc);
  return acc;
}
Term tvar(const std::string& name) { return Term::var(name, Sort::Temp); }

}  // namespace fm

namespace {

std::string var_decl(const Term& v) {
  switch (v.sort()) {
    case Sort::Temp: return "#" + v.name();
    case Sort::Pub: return v.name() + ":pub";
    case Sort::Fresh: return v.name() + ":fresh";
    case Sort::Msg: return v.name();
  }
  return v.name();
}

std::string time_str(const Term& t) { return t.is_var() ? "#" + t.name() : t.str(); }

bool is_atomic(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::False:
    case Formula::Kind::True:
    case Formula::Kind::Action:
    case Formula::Kind::Less:
    case Formula::Kind::EqTime:
    case Formula::Kind::EqTerm:
    case Formula::Kind::Not:
      return true;
    default:
      return false;
  }
}

std::string wrap(const FormulaPtr& f) { return is_atomic(*f) ? f->str() : "(" + f->str() + ")"; }

}  // namespace

std::string Formula::str() const {
  switch (kind) {
    case Kind::False: return "false";
    case Kind::True: return "true";
    case Kind::Action: {
      std::string s = fact + "(";
      for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i].str();
      return s + ")@" + time_str(lhs);
    }
    case Kind::Less: return time_str(lhs) + " < " + time_str(rhs);
    case Kind::EqTime: return time_str(lhs) + " = " + time_str(rhs);
    case Kind::EqTerm: return lhs.str() + " = " + rhs.str();
    case Kind::Not: return "not(" + a->str() + ")";
    case Kind::And: return wrap(a) + " & " + wrap(b);
    case Kind::Or: return wrap(a) + " | " + wrap(b);
    case Kind::Implies: return wrap(a) + " ==> " + wrap(b);
    case Kind::Exists:
    case Kind::Forall: {
      std::string s = kind == Kind::Exists ? "Ex" : "All";
      for (const auto& v : vars) s += " " + var_decl(v);
      return s + ". " + a->str();
    }
  }
  return "?";
}

namespace {

void free_vars_rec(const FormulaPtr& f, std::set<std::string>& bound, std::vector<Term>& out) {
  auto add_term = [&](const Term& t) {
    std::vector<Term> vs;
    collect_var_terms(t, vs);
    for (const auto& v : vs) {
      if (bound.count(v.name())) continue;
      bool dup = std::any_of(out.begin(), out.end(), [&](const Term& o) { return o.name() == v.name(); });
      if (!dup) out.push_back(v);
    }
  };
  switch (f->kind) {
    case Formula::Kind::False:
    case Formula::Kind::True:
      return;
    case Formula::Kind::Action:
      for (const auto& a : f->args) add_term(a);
      add_term(f->lhs);
      return;
    case Formula::Kind::Less:
    case Formula::Kind::EqTime:
    case Formula::Kind::EqTerm:
      add_term(f->lhs);
      add_term(f->rhs);
      return;
    case Formula::Kind::Not:
      free_vars_rec(f->a, bound, out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
      free_vars_rec(f->a, bound, out);
      free_vars_rec(f->b, bound, out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      std::set<std::string> inner = bound;
      for (const auto& v : f->vars) inner.insert(v.name());
      free_vars_rec(f->a, inner, out);
      return;
    }
  }
}

}  // namespace

std::vector<Term> free_vars(const FormulaPtr& f) {
  std::set<std::string> bound;
  std::vector<Term> out;
  free_vars_rec(f, bound, out);
  return out;
}

FormulaPtr substitute(const FormulaPtr& f, const Substitution& s) {
  if (s.empty()) return f;
  Formula g = *f;
  switch (f->kind) {
    case Formula::Kind::False:
    case Formula::Kind::True:
      return f;
    case Formula::Kind::Action:
      for (auto& a : g.args) a = substitute(a, s);
      g.lhs = substitute(g.lhs, s);
      break;
    case Formula::Kind::Less:
    case Formula::Kind::EqTime:
    case Formula::Kind::EqTerm:
      g.lhs = substitute(g.lhs, s);
      g.rhs = substitute(g.rhs, s);
      break;
    case Formula::Kind::Not:
      g.a = substitute(f->a, s);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
      g.a = substitute(f->a, s);
      g.b = substitute(f->b, s);
      break;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      Substitution inner = s;
      for (const auto& v : f->vars) inner.erase(v.name());
      g.a = substitute(f->a, inner);
      break;
    }
  }
  return std::make_shared<const Formula>(std::move(g));
}

void collect_facts(const FormulaPtr& f, std::vector<std::pair<std::string, std::size_t>>& out) {
  if (!f) return;
  if (f->kind == Formula::Kind::Action) out.emplace_back(f->fact, f->args.size());
  collect_facts(f->a, out);
  collect_facts(f->b, out);
}

}  // namespace veracct
