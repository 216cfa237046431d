#include <functional>
#include <map>
#include <random>
#include <variant>

#include "doctest.h"
#include "veracct/corpus.hpp"
#include "veracct/parser.hpp"
#include "veracct/semantics.hpp"
#include "veracct/tracelogic.hpp"
#include "support.hpp"

using namespace veracct;
using namespace veracct::testing;

namespace {

TraceStep step_of(std::vector<Fact> fs) {
  std::sort(fs.begin(), fs.end());
  return TraceStep{std::move(fs), "", ""};
}

// Independent evaluator used as the satisfaction oracle. Message quantifiers
// range over the subterms of the trace's fact arguments.
struct Oracle {
  const Trace& t;
  const RewriteSystem& rs;
  std::vector<Term> domain;

  Oracle(const Trace& tr, const RewriteSystem& r) : t(tr), rs(r) {
    TermSet d;
    std::function<void(const Term&)> add = [&](const Term& u) {
      d.insert(u);
      for (const auto& a : u.args()) add(a);
    };
    for (const auto& st : t.steps)
      for (const auto& f : st.facts)
        for (const auto& a : f.args) add(normalize(a, rs));
    domain.assign(d.begin(), d.end());
  }

  using Env = std::map<std::string, std::variant<std::size_t, Term>>;

  Term inst(const Term& u, const Env& env) const {
    Substitution s;
    for (const auto& [k, v] : env)
      if (auto* tm = std::get_if<Term>(&v)) s[k] = *tm;
    return normalize(substitute(u, s), rs);
  }

  std::size_t idx(const Term& u, const Env& env) const { return std::get<std::size_t>(env.at(u.name())); }

  bool eval(const FormulaPtr& f, Env env) const {
    using K = Formula::Kind;
    switch (f->kind) {
      case K::False: return false;
      case K::True: return true;
      case K::Action: {
        std::size_t i = idx(f->lhs, env);
        if (i >= t.size()) return false;
        for (const auto& fact : t.steps[i].facts) {
          if (fact.name != f->fact || fact.args.size() != f->args.size()) continue;
          bool all = true;
          for (std::size_t k = 0; k < fact.args.size() && all; ++k)
            all = normalize(fact.args[k], rs) == inst(f->args[k], env);
          if (all) return true;
        }
        return false;
      }
      case K::Less: return idx(f->lhs, env) < idx(f->rhs, env);
      case K::EqTime: return idx(f->lhs, env) == idx(f->rhs, env);
      case K::EqTerm: return inst(f->lhs, env) == inst(f->rhs, env);
      case K::Not: return !eval(f->a, env);
      case K::And: return eval(f->a, env) && eval(f->b, env);
      case K::Or: return eval(f->a, env) || eval(f->b, env);
      case K::Implies: return !eval(f->a, env) || eval(f->b, env);
      case K::Exists:
      case K::Forall: {
        bool ex = f->kind == K::Exists;
        std::function<bool(std::size_t, Env&)> go = [&](std::size_t k, Env& e) -> bool {
          if (k == f->vars.size()) return eval(f->a, e);
          const Term& v = f->vars[k];
          if (v.sort() == Sort::Temp) {
            for (std::size_t i = 0; i < t.size(); ++i) {
              e[v.name()] = i;
              if (go(k + 1, e) == ex) return ex;
            }
          } else {
            for (const auto& d : domain) {
              if (v.sort() == Sort::Pub && d.kind() != Term::Kind::PubName) continue;
              if (v.sort() == Sort::Fresh && d.kind() != Term::Kind::FreshName) continue;
              e[v.name()] = d;
              if (go(k + 1, e) == ex) return ex;
            }
          }
          e.erase(v.name());
          return !ex;
        };
        return go(0, env);
      }
    }
    return false;
  }
};

}  // namespace

TEST_CASE("satisfies: monitor observation on an exceptional trace") {
  Model m = corpus_model("monitor_fixed");
  auto omega = parse_formula("Ex a #i #j. Execute(a)@i & LogD(a)@j & not (a = 'Normal')", m);
  Trace t{{step_of({{"LogD", {p("Exc")}}}), step_of({{"Execute", {p("Exc")}}})}};
  CHECK(satisfies(t, {}, omega, m.rs));
  Trace honest{{step_of({{"LogD", {p("Normal")}}}), step_of({{"Execute", {p("Normal")}}})}};
  CHECK_FALSE(satisfies(honest, {}, omega, m.rs));
}

TEST_CASE("satisfies: vacuous universal and out-of-range timepoints") {
  Model m = corpus_model("monitor_fixed");
  auto phi = parse_formula("All a #i. Execute(a)@i ==> F", m);
  CHECK(satisfies(Trace{}, {}, phi, m.rs));
  auto atom = fm::action("Execute", {p("Normal")}, fm::tvar("i"));
  Trace t{{step_of({{"Execute", {p("Normal")}}})}};
  Valuation in_range, beyond;
  in_range.times["i"] = 0;
  beyond.times["i"] = 3;
  CHECK(satisfies(t, in_range, atom, m.rs));
  CHECK_FALSE(satisfies(t, beyond, atom, m.rs));
  CHECK_THROWS_AS(satisfies(t, {}, atom, m.rs), TraceLogicError);
}

TEST_CASE("holds_forall: counter-valuation for a violating monitor trace") {
  Model m = corpus_model("monitor_fixed");
  auto phi = parse_formula("All a2 #i2. Execute(a2)@i2 ==> a2 = 'Normal'", m);
  Trace t{{step_of({{"LogD", {p("Exc")}}}), step_of({{"Execute", {p("Exc")}}})}};
  auto r = holds_forall(t, phi, m.rs);
  CHECK_FALSE(r.holds);
  REQUIRE(r.counter);
  CHECK(r.counter->terms.at("a2") == p("Exc"));
  CHECK(r.counter->times.at("i2") == 1);
  CHECK(holds_forall(t, fm::neg(fm::falsum()), m.rs).holds);
}

TEST_CASE("holds_forall: knowledge atoms absent from the trace") {
  Model m = parse_model(R"(
functions: sk/1 [private]
parties: A
main = event Time('1')
property: All #k #l t. K(sk('A'))@k & Time(t)@l ==> #l < #k
verdict:
  case otherwise -> {}
options: k-facts = on
)");
  TraceSet ts = explore(m);
  for (const auto& t : ts.traces) CHECK(holds_forall(t, m.property, m.rs).holds);
}

TEST_CASE("holds_exists_set: whodunit witnesses and empty sets") {
  Model m = corpus_model("whodunit_faulty");
  TraceSet ts = explore(m);
  auto unequal = parse_formula("Ex #i. Unequal()@i", m);
  auto w = holds_exists_set(ts.traces, unequal, m.rs);
  REQUIRE(w);
  CHECK(ts.traces[w->trace_index].key().find("Unequal()") != std::string::npos);
  for (std::size_t i = 0; i < w->trace_index; ++i) CHECK(ts.traces[i].key().find("Unequal()") == std::string::npos);
  CHECK_FALSE(holds_exists_set({}, unequal, m.rs));

  Model fixed = corpus_model("whodunit_fixed");
  std::vector<Trace> honest;
  for (const auto& t : explore(fixed).traces)
    if (corrupted(t, "Corrupted", fixed.parties).empty()) honest.push_back(t);
  REQUIRE_FALSE(honest.empty());
  CHECK_FALSE(holds_exists_set(honest, parse_formula("Ex #i. Corrupted('A')@i", fixed), fixed.rs));
}

TEST_CASE("unguarded message quantifiers are reported") {
  Model m = corpus_model("monitor_fixed");
  Term a = Term::var("a");
  CHECK(unguarded_variable(fm::exists({a}, fm::eq_term(a, p("Normal"))), m.rs) == std::optional<std::string>("a"));
  CHECK_THROWS_AS(parse_formula("Ex a. a = 'Normal'", m), ModelError);
  CHECK_THROWS_AS(parse_formula("Execute('Normal')@i", m), ModelError);
  CHECK_FALSE(unguarded_variable(m.property, m.rs));
  for (const auto& c : m.verdict) CHECK_FALSE(unguarded_variable(c.omega, m.rs));
}

TEST_CASE("property: satisfaction agrees with the brute-force evaluator") {
  Gen g(20261018);
  RewriteSystem rs;
  for (int n = 0; n < 600; ++n) {
    Trace t = g.trace();
    FormulaPtr phi = g.formula(3, {}, {});
    Oracle o(t, rs);
    bool expect = o.eval(phi, {});
    CHECK_MESSAGE(satisfies(t, {}, phi, rs) == expect, phi->str(), " on ", t.key());
    CHECK(holds_forall(t, phi, rs).holds == expect);
  }
}

TEST_CASE("property: negation duality on finite domains") {
  Gen g(7);
  RewriteSystem rs;
  for (int n = 0; n < 300; ++n) {
    Trace t = g.trace();
    FormulaPtr phi = g.formula(3, {}, {});
    CHECK(holds_forall(t, phi, rs).holds == !holds_exists(t, fm::neg(phi), rs).has_value());
  }
}

TEST_CASE("property: extra domain terms do not change guarded formulas") {
  Gen g(99);
  RewriteSystem rs;
  DomainPolicy wide;
  wide.extras = {p("z"), Term::fresh("m.9"), Term::pair(p("z"), p("a"))};
  for (int n = 0; n < 300; ++n) {
    Trace t = g.trace();
    FormulaPtr phi = g.formula(3, {}, {});
    CHECK(satisfies(t, {}, phi, rs) == satisfies(t, {}, phi, rs, wide));
  }
}

TEST_CASE("property: E-equal fact arguments do not change satisfaction") {
  Gen g(1234);
  RewriteSystem rs = orient_theory({});
  for (int n = 0; n < 300; ++n) {
    Trace t = g.trace();
    Trace t2 = t;
    for (auto& st : t2.steps)
      for (auto& f : st.facts)
        for (auto& a : f.args) a = Term::app("fst", {Term::pair(a, p("junk"))});
    FormulaPtr phi = g.formula(3, {}, {});
    CHECK(satisfies(t, {}, phi, rs) == satisfies(t2, {}, phi, rs));
  }
}
