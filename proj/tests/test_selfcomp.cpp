#include <random>

#include "doctest.h"
#include "support.hpp"
#include "veracct/parser.hpp"
#include "veracct/selfcomp.hpp"
#include "veracct/tracelogic.hpp"

using namespace veracct;
using namespace veracct::testing;

namespace {

Trace trace_of(std::vector<std::vector<Fact>> steps) {
  Trace t;
  for (auto& fs : steps) t.steps.push_back(TraceStep{fs, "", ""});
  return t;
}

}  // namespace

TEST_CASE("annotate: brackets a trace with Init and Stop") {
  Term e = execution_id(1);
  Trace t = trace_of({{{"A", {p("a")}}}, {{"C", {}}}});
  Trace a = annotate(t, e);
  REQUIRE(a.size() == 4);
  CHECK(a.steps[0].facts == std::vector<Fact>{{"Init", {e}}});
  CHECK(a.steps[1].facts == std::vector<Fact>{{"A", {p("a")}}, {"Event", {e}}});
  CHECK(a.steps[2].facts == std::vector<Fact>{{"C", {}}, {"Event", {e}}});
  CHECK(a.steps[3].facts == std::vector<Fact>{{"Stop", {e}}});
  for (const auto& st : a.steps) CHECK(st.eid == e.name());
  CHECK(annotate(Trace{}, e).size() == 2);
}

TEST_CASE("compose_pairs: all ordered pairs, including self-pairs") {
  std::vector<Trace> ts{trace_of({{{"C", {}}}}), trace_of({})};
  auto c = compose_pairs(ts);
  REQUIRE(c.size() == 4);
  CHECK(c[0].first == 0);
  CHECK(c[0].second == 0);
  CHECK(c[1].second == 1);
  CHECK(c[2].first == 1);
  CHECK(c[0].trace.size() == 6);
  CHECK(c[3].trace.size() == 4);
  CHECK(compose_pairs({}).empty());
  CHECK(compose_pairs(ts, 3).size() == 3);
}

TEST_CASE("alpha_seq_holds: sequential executions only") {
  Term e1 = execution_id(1), e2 = execution_id(2);
  Trace t = trace_of({{{"C", {}}}});
  Trace seq = annotate(t, e1);
  for (const auto& st : annotate(t, e2).steps) seq.steps.push_back(st);
  CHECK(alpha_seq_holds(seq));
  CHECK(alpha_seq_holds(Trace{}));

  Trace open = annotate(t, e1);
  open.steps.pop_back();
  CHECK_FALSE(alpha_seq_holds(open));

  Trace overlap = seq;
  std::swap(overlap.steps[2], overlap.steps[3]);
  CHECK_FALSE(alpha_seq_holds(overlap));

  Trace stray = annotate(t, e1);
  stray.steps.push_back(TraceStep{{{"Event", {e1}}}, "", ""});
  CHECK_FALSE(alpha_seq_holds(stray));
}

TEST_CASE("rewrite_formula: tags every action atom with the execution") {
  Model m = corpus_model("monitor_fixed");
  Term e = execution_id(1);
  auto phi = parse_formula("All a #i. Execute(a)@i ==> a = 'Normal'", m);
  auto r = rewrite_formula(phi, e);
  REQUIRE(r->kind == Formula::Kind::Forall);
  const auto& body = r->a;
  REQUIRE(body->kind == Formula::Kind::Implies);
  REQUIRE(body->a->kind == Formula::Kind::And);
  CHECK(body->a->b->fact == "Event");
  CHECK(body->a->b->args == std::vector<Term>{e});
  CHECK(body->b->kind == Formula::Kind::EqTerm);
  CHECK(rewrite_formula(fm::falsum(), e)->kind == Formula::Kind::False);
}

TEST_CASE("project: recovers each execution from a composed trace") {
  Gen g(3);
  for (int n = 0; n < 100; ++n) {
    std::vector<Trace> ts{g.trace(), g.trace()};
    for (const auto& ct : compose_pairs(ts)) {
      CHECK(project(ct.trace, ct.e1).key() == ts[ct.first].key());
      CHECK(project(ct.trace, ct.e2).key() == ts[ct.second].key());
    }
  }
}

TEST_CASE("property: rewritten formulas on composed traces agree with each execution") {
  Gen g(42);
  RewriteSystem rs;
  for (int n = 0; n < 200; ++n) {
    std::vector<Trace> ts{g.trace(), g.trace()};
    FormulaPtr phi = g.formula(3, {}, {});
    for (const auto& ct : compose_pairs(ts)) {
      bool left = satisfies(ts[ct.first], {}, phi, rs);
      bool right = satisfies(ts[ct.second], {}, phi, rs);
      CHECK_MESSAGE(satisfies(ct.trace, {}, rewrite_formula(phi, ct.e1), rs) == left, phi->str());
      CHECK_MESSAGE(satisfies(ct.trace, {}, rewrite_formula(phi, ct.e2), rs) == right, phi->str());
      CHECK(alpha_seq_holds(ct.trace));
    }
  }
}

TEST_CASE("check_RL_selfcomp: monitor cases relate only to themselves") {
  Model m = corpus_model("monitor_fixed");
  TraceSet ts = explore(m);
  auto composed = compose_pairs(ts.traces);
  auto r00 = check_RL_selfcomp(composed, m, 0, 0);
  auto r01 = check_RL_selfcomp(composed, m, 0, 1);
  auto r11 = check_RL_selfcomp(composed, m, 1, 1);
  CHECK(r00.populated);
  CHECK(r00.value);
  CHECK(r01.populated);
  CHECK_FALSE(r01.value);
  REQUIRE(r01.witness);
  CHECK(r11.value);
  CHECK(check_RL_selfcomp({}, m, 0, 0).value);
  CHECK_FALSE(check_RL_selfcomp({}, m, 0, 0).populated);
}

TEST_CASE("run_selfcomp: agrees with the derived lifting on the monitors") {
  for (const char* name : {"monitor_fixed", "monitor_faulty"}) {
    Model m = corpus_model(name);
    TraceSet ts = explore(m);
    Universe u = build_universe(m, ts.traces);
    auto rep = run_selfcomp(m, ts, u);
    CHECK(rep.alpha_ok);
    CHECK(rep.pass());
    CHECK(rep.composed == ts.traces.size() * ts.traces.size());
    for (const auto& e : rep.entries) CHECK_MESSAGE(e.status == "agree", name, " ", e.i, ",", e.j);
  }
}
