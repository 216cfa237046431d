#include "veracct/tracelogic.hpp"

#include <algorithm>
#include <set>

namespace veracct {

std::string Valuation::str() const {
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& [v, i] : times) items.emplace_back(v, "#" + std::to_string(i));
  for (const auto& [v, t] : terms) items.emplace_back(v, t.str());
  std::sort(items.begin(), items.end());
  std::string s;
  for (const auto& [v, x] : items) s += (s.empty() ? "" : ", ") + v + "=" + x;
  return s;
}

namespace {

struct Literal {
  FormulaPtr f;
  bool positive;
  std::vector<Term> vars;  // free variables of f
};

void flatten(const FormulaPtr& f, bool positive, std::vector<Literal>& out) {
  using K = Formula::Kind;
  if (positive && f->kind == K::And) {
    flatten(f->a, true, out);
    flatten(f->b, true, out);
  } else if (!positive && f->kind == K::Or) {
    flatten(f->a, false, out);
    flatten(f->b, false, out);
  } else if (!positive && f->kind == K::Implies) {
    flatten(f->a, true, out);
    flatten(f->b, false, out);
  } else if (f->kind == K::Not) {
    flatten(f->a, !positive, out);
  } else if ((positive && f->kind == K::True) || (!positive && f->kind == K::False)) {
    return;
  } else {
    out.push_back(Literal{f, positive, free_vars(f)});
  }
}

bool constructor_only(const Term& t, const RewriteSystem& rs) {
  if (t.is_app() && rs.is_destructor(t.name())) return false;
  for (const auto& a : t.args())
    if (!constructor_only(a, rs)) return false;
  return true;
}

bool is_guard(const Literal& l, const RewriteSystem& rs) {
  if (!l.positive || l.f->kind != Formula::Kind::Action) return false;
  for (const auto& a : l.f->args)
    if (!constructor_only(a, rs)) return false;
  return true;
}

struct Env {
  std::map<std::string, std::size_t> times;
  Substitution terms;

  bool bound(const std::string& v) const { return times.count(v) || terms.count(v); }
  void unbind(const std::string& v) {
    times.erase(v);
    terms.erase(v);
  }
};

class Evaluator {
 public:
  Evaluator(const Trace& t, const RewriteSystem& rs, const DomainPolicy& policy)
      : trace_(t), rs_(rs), policy_(policy) {
    for (const auto& st : t.steps) {
      std::vector<Fact> fs;
      for (const auto& f : st.facts) {
        Fact n{f.name, {}};
        for (const auto& a : f.args) n.args.push_back(normalize(a, rs));
        fs.push_back(std::move(n));
      }
      facts_.push_back(std::move(fs));
    }
  }

  bool eval(const FormulaPtr& f, Env& env) {
    using K = Formula::Kind;
    switch (f->kind) {
      case K::False: return false;
      case K::True: return true;
      case K::Action: {
        std::size_t i = time_of(f->lhs, env);
        if (i >= facts_.size()) return false;
        std::vector<Term> args;
        for (const auto& a : f->args) args.push_back(normalize(term_of(a, env), rs_));
        for (const auto& fact : facts_[i])
          if (fact.name == f->fact && fact.args == args) return true;
        return false;
      }
      case K::Less: return time_of(f->lhs, env) < time_of(f->rhs, env);
      case K::EqTime: return time_of(f->lhs, env) == time_of(f->rhs, env);
      case K::EqTerm: return equal_mod_E(term_of(f->lhs, env), term_of(f->rhs, env), rs_);
      case K::Not: return !eval(f->a, env);
      case K::And: return eval(f->a, env) && eval(f->b, env);
      case K::Or: return eval(f->a, env) || eval(f->b, env);
      case K::Implies: return !eval(f->a, env) || eval(f->b, env);
      case K::Exists:
      case K::Forall: {
        std::vector<Literal> lits;
        flatten(f->a, f->kind == K::Exists, lits);
        Env inner = env;
        for (const auto& v : f->vars) inner.unbind(v.name());
        bool found = search(f->vars, lits, inner, nullptr);
        return f->kind == K::Exists ? found : !found;
      }
    }
    return false;
  }

  // Looks for a binding of `vars` making every literal true.
  bool search(const std::vector<Term>& vars, const std::vector<Literal>& lits, Env& env, Env* witness) {
    std::vector<bool> done(lits.size(), false);
    return search_rec(vars, lits, done, env, witness);
  }

 private:
  bool ready(const Literal& l, const Env& env) const {
    return std::all_of(l.vars.begin(), l.vars.end(), [&](const Term& v) { return env.bound(v.name()); });
  }

  bool holds(const Literal& l, Env& env) { return eval(l.f, env) == l.positive; }

  bool search_rec(const std::vector<Term>& vars, const std::vector<Literal>& lits, std::vector<bool>& done,
                  Env& env, Env* witness) {
    // Check every literal whose variables are all bound.
    std::vector<std::size_t> checked;
    bool ok = true;
    for (std::size_t k = 0; k < lits.size(); ++k) {
      if (done[k] || !ready(lits[k], env)) continue;
      done[k] = true;
      checked.push_back(k);
      if (!holds(lits[k], env)) {
        ok = false;
        break;
      }
    }
    auto restore = [&] {
      for (auto k : checked) done[k] = false;
    };
    if (!ok) {
      restore();
      return false;
    }
    const Term* unbound = nullptr;
    for (const auto& v : vars)
      if (!env.bound(v.name())) {
        unbound = &v;
        break;
      }
    if (!unbound) {
      bool all = std::all_of(done.begin(), done.end(), [](bool b) { return b; });
      if (!all) {
        // Remaining literals mention variables bound outside this quantifier
        // but missing from the environment.
        for (std::size_t k = 0; k < lits.size(); ++k)
          if (!done[k])
            for (const auto& v : lits[k].vars)
              if (!env.bound(v.name())) throw TraceLogicError("unbound variable '" + v.name() + "'");
      }
      if (witness) *witness = env;
      restore();
      return true;
    }
    bool found = false;
    // Prefer a guard: a positive action atom mentioning an unbound variable.
    for (std::size_t k = 0; k < lits.size() && !found; ++k) {
      if (done[k] || !is_guard(lits[k], rs_)) continue;
      const Formula& a = *lits[k].f;
      std::vector<Term> pats;
      for (const auto& arg : a.args) pats.push_back(substitute(arg, env.terms));
      const Term& tv = a.lhs;
      bool time_bound = env.times.count(tv.name()) > 0;
      std::size_t lo = 0, hi = facts_.size();
      if (time_bound) {
        lo = env.times.at(tv.name());
        hi = std::min(lo + 1, facts_.size());
      }
      for (std::size_t i = lo; i < hi && !found; ++i) {
        for (const auto& fact : facts_[i]) {
          if (fact.name != a.fact || fact.args.size() != pats.size()) continue;
          Substitution s;
          bool match = true;
          for (std::size_t j = 0; j < pats.size() && match; ++j) match = match_syntactic(pats[j], fact.args[j], s);
          if (!match) continue;
          Env next = env;
          for (auto& [v, t] : s) next.terms[v] = t;
          next.times[tv.name()] = i;
          if (search_rec(vars, lits, done, next, witness)) {
            found = true;
            break;
          }
        }
      }
      restore();
      return found;
    }
    // No guard: enumerate the variable's domain.
    if (unbound->sort() == Sort::Temp) {
      for (std::size_t i = 0; i < facts_.size() && !found; ++i) {
        Env next = env;
        next.times[unbound->name()] = i;
        found = search_rec(vars, lits, done, next, witness);
      }
    } else {
      for (const auto& u : domain()) {
        if (unbound->sort() == Sort::Pub && u.kind() != Term::Kind::PubName) continue;
        if (unbound->sort() == Sort::Fresh && u.kind() != Term::Kind::FreshName) continue;
        Env next = env;
        next.terms[unbound->name()] = u;
        if (search_rec(vars, lits, done, next, witness)) {
          found = true;
          break;
        }
      }
    }
    restore();
    return found;
  }

  const std::vector<Term>& domain() {
    if (!domain_) {
      TermSet base = policy_.extras;
      for (const auto& fs : facts_)
        for (const auto& f : fs)
          for (const auto& a : f.args) base.insert(a);
      TermSet closed = subterm_closure(base, rs_);
      domain_ = std::vector<Term>(closed.begin(), closed.end());
    }
    return *domain_;
  }

  std::size_t time_of(const Term& t, const Env& env) const {
    auto it = env.times.find(t.name());
    if (it == env.times.end()) throw TraceLogicError("unbound timepoint variable '" + t.name() + "'");
    return it->second;
  }

  Term term_of(const Term& t, const Env& env) const {
    Term r = substitute(t, env.terms);
    if (!r.ground()) {
      std::set<std::string> vs;
      collect_vars(r, vs);
      throw TraceLogicError("unbound variable '" + *vs.begin() + "'");
    }
    return r;
  }

  const Trace& trace_;
  const RewriteSystem& rs_;
  const DomainPolicy& policy_;
  std::vector<std::vector<Fact>> facts_;
  std::optional<std::vector<Term>> domain_;
};

Env to_env(const Valuation& v) { return Env{v.times, v.terms}; }

Valuation restrict(const Env& e, const std::vector<Term>& vars) {
  Valuation v;
  for (const auto& x : vars) {
    if (auto it = e.times.find(x.name()); it != e.times.end()) v.times[x.name()] = it->second;
    if (auto it = e.terms.find(x.name()); it != e.terms.end()) v.terms[x.name()] = it->second;
  }
  return v;
}

}  // namespace

bool satisfies(const Trace& t, const Valuation& theta, const FormulaPtr& phi, const RewriteSystem& rs,
               const DomainPolicy& policy) {
  Evaluator ev(t, rs, policy);
  Env env = to_env(theta);
  for (const auto& v : free_vars(phi))
    if (!env.bound(v.name())) throw TraceLogicError("unbound variable '" + v.name() + "'");
  return ev.eval(phi, env);
}

ForallResult holds_forall(const Trace& t, const FormulaPtr& phi, const RewriteSystem& rs,
                          const DomainPolicy& policy) {
  std::vector<Term> vars = free_vars(phi);
  FormulaPtr body = phi;
  while (body->kind == Formula::Kind::Forall) {
    vars.insert(vars.end(), body->vars.begin(), body->vars.end());
    body = body->a;
  }
  std::vector<Literal> lits;
  flatten(body, false, lits);
  Evaluator ev(t, rs, policy);
  Env env, witness;
  ForallResult r;
  if (ev.search(vars, lits, env, &witness)) {
    r.holds = false;
    r.counter = restrict(witness, vars);
  }
  return r;
}

std::optional<Valuation> holds_exists(const Trace& t, const FormulaPtr& phi, const RewriteSystem& rs,
                                      const DomainPolicy& policy) {
  std::vector<Term> vars = free_vars(phi);
  FormulaPtr body = phi;
  while (body->kind == Formula::Kind::Exists) {
    vars.insert(vars.end(), body->vars.begin(), body->vars.end());
    body = body->a;
  }
  std::vector<Literal> lits;
  flatten(body, true, lits);
  Evaluator ev(t, rs, policy);
  Env env, witness;
  if (!ev.search(vars, lits, env, &witness)) return std::nullopt;
  return restrict(witness, vars);
}

std::optional<ExistsWitness> holds_exists_set(const std::vector<Trace>& ts, const FormulaPtr& phi,
                                              const RewriteSystem& rs, const DomainPolicy& policy) {
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (auto v = holds_exists(ts[i], phi, rs, policy)) return ExistsWitness{i, *v};
  return std::nullopt;
}

namespace {

std::optional<std::string> unguarded_rec(const FormulaPtr& f, const RewriteSystem& rs) {
  if (!f) return std::nullopt;
  if (f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::Forall) {
    std::vector<Literal> lits;
    flatten(f->a, f->kind == Formula::Kind::Exists, lits);
    for (const auto& v : f->vars) {
      if (v.sort() == Sort::Temp) continue;
      bool guarded = false;
      for (const auto& l : lits) {
        if (!is_guard(l, rs)) continue;
        for (const auto& a : l.f->args) {
          std::set<std::string> vs;
          collect_vars(a, vs);
          guarded = guarded || vs.count(v.name());
        }
      }
      if (!guarded) return v.name();
    }
  }
  if (auto r = unguarded_rec(f->a, rs)) return r;
  return unguarded_rec(f->b, rs);
}

}  // namespace

std::optional<std::string> unguarded_variable(const FormulaPtr& phi, const RewriteSystem& rs) {
  return unguarded_rec(phi, rs);
}

}  // namespace veracct
