#include <algorithm>
#include <random>

#include "doctest.h"
#include "veracct/accountability.hpp"
#include "veracct/corpus.hpp"
#include "veracct/parser.hpp"

using namespace veracct;

namespace {

Model corpus_model(const std::string& name) { return load_model(std::string(VERACCT_CORPUS_DIR) + "/" + name + ".acc"); }

Term p(const char* n) { return Term::pub(n); }

Trace trace_of(std::vector<std::vector<Fact>> steps) {
  Trace t;
  for (auto& fs : steps) {
    std::sort(fs.begin(), fs.end());
    t.steps.push_back(TraceStep{fs, "", ""});
  }
  return t;
}

TraceFacts tf(PartySet corrupted, bool phi, std::size_t c, std::vector<Term> controls = {}) {
  return TraceFacts{std::move(corrupted), phi, {c}, std::move(controls), ""};
}

bool failed(const ConditionReport& r, const std::string& name) {
  auto f = r.failed_conditions();
  return std::find(f.begin(), f.end(), name) != f.end();
}

// Minimal corrupted sets among related violating traces, computed from the
// definition over the whole universe.
Verdict apv_oracle(const Universe& u, std::size_t t) {
  if (u.traces[t].phi) return {};
  std::vector<PartySet> c;
  for (std::size_t k = 0; k < u.traces.size(); ++k)
    if (!u.traces[k].phi && relate(u, t, k)) c.push_back(u.traces[k].corrupted);
  Verdict out;
  for (const auto& s : c) {
    bool strict_sub = std::any_of(c.begin(), c.end(), [&](const PartySet& o) {
      return o != s && std::includes(s.begin(), s.end(), o.begin(), o.end());
    });
    if (!strict_sub) out.insert(s);
  }
  return out;
}

Universe random_rw_universe(std::mt19937& rng) {
  Universe u;
  u.parties = {"A", "B", "C"};
  u.relation.kind = RelationSpec::Kind::RW;
  u.verdicts = {{}};
  std::uniform_int_distribution<int> mask(0, 7), coin(0, 1), len(1, 8);
  int n = len(rng);
  for (int k = 0; k < n; ++k) {
    PartySet s;
    int m = mask(rng);
    for (int b = 0; b < 3; ++b)
      if (m & (1 << b)) s.insert(u.parties[static_cast<std::size_t>(b)]);
    u.traces.push_back(tf(s, coin(rng) == 0, 0));
  }
  return u;
}

}  // namespace

TEST_CASE("apv: faulty whodunit blames A or S") {
  Model m = corpus_model("whodunit_faulty");
  TraceSet ts = explore(m);
  Universe u = build_universe(m, ts.traces);
  bool seen = false;
  for (std::size_t t = 0; t < u.traces.size(); ++t) {
    if (u.traces[t].phi || u.traces[t].corrupted != PartySet{"A", "S"}) continue;
    CHECK(apv(u, t) == Verdict{{"A"}, {"S"}});
    seen = true;
  }
  CHECK(seen);
}

TEST_CASE("apv: two doctors colluding through the monitor") {
  Model m = corpus_model("two_doctors");
  TraceSet ts = explore(m);
  Trace t = trace_of({{{"Corrupted", {p("D1")}}},
                      {{"Corrupted", {p("D2")}}},
                      {{"Corrupted", {p("D3")}}},
                      {{"Execute", {p("D1"), p("Exceptional")}}},
                      {{"Execute", {p("D2"), p("Exceptional")}}}});
  for (auto& st : t.steps)
    if (st.facts[0].name == "Execute") st.by = "M";
  auto it = std::find_if(ts.traces.begin(), ts.traces.end(), [&](const Trace& x) { return x.key() == t.key(); });
  REQUIRE(it != ts.traces.end());
  CHECK(apv(ts.traces, t, m.property, m.relation, m) == Verdict{{"D1"}, {"D2"}});
  CHECK(verdict_of(t, m.verdict, m.rs) == Verdict{{"D1"}, {"D2"}});
}

TEST_CASE("relate: rw compares corrupted sets, rc compares control payloads") {
  Model m = corpus_model("whodunit_faulty");
  Trace none;
  Trace a = trace_of({{{"Corrupted", {p("A")}}}});
  Trace as = trace_of({{{"Corrupted", {p("A")}}}, {{"Corrupted", {p("S")}}}});
  RelationSpec rw;
  CHECK(relate(as, a, rw, m));
  CHECK(relate(as, none, rw, m));
  CHECK_FALSE(relate(a, as, rw, m));

  RelationSpec rc{RelationSpec::Kind::RC, {}};
  auto ctl = [](const char* x, const char* y) { return Fact{"Control", {p(x), p(y)}}; };
  Trace c1 = trace_of({{ctl("0", "1")}});
  Trace c1b = trace_of({{{"Corrupted", {p("A")}}}, {ctl("0", "1")}});
  Trace c2 = trace_of({{ctl("0", "2")}});
  CHECK(relate(c1, c1b, rc, m));
  CHECK_FALSE(relate(c1, c2, rc, m));
  CHECK(relate(c1, none, rc, m));
}

TEST_CASE("verdict_of: monitor cases") {
  Model m = corpus_model("monitor_fixed");
  Trace honest = trace_of({{{"Execute", {p("Normal")}}}});
  CHECK(verdict_of(honest, m.verdict, m.rs).empty());
  Trace empty;
  CHECK(verdict_of(empty, m.verdict, m.rs).empty());
}

TEST_CASE("verdict_of: overlapping and missing cases raise") {
  Model m = parse_model(R"(
parties: A
main = event Ping()
property: All #i. Ping()@i ==> Ping()@i
verdict:
  case Ex #i. Ping()@i -> {{A}}
  case Ex #i #j. Ping()@i & Ping()@j -> {}
)");
  Trace t = trace_of({{{"Ping", {}}}});
  try {
    verdict_of(t, m.verdict, m.rs);
    FAIL("expected MultipleCasesMatch");
  } catch (const VerdictError& e) {
    CHECK(e.kind == VerdictError::Kind::MultipleCasesMatch);
    CHECK(e.cases == std::vector<std::size_t>{0, 1});
  }
  try {
    verdict_of(Trace{}, m.verdict, m.rs);
    FAIL("expected NoCaseMatches");
  } catch (const VerdictError& e) {
    CHECK(e.kind == VerdictError::Kind::NoCaseMatches);
  }
}

TEST_CASE("conditions: a verdict missing a singleton culprit fails completeness") {
  Universe u;
  u.parties = {"A", "B"};
  u.verdicts = {{}, {{"A"}}, {{"A", "B"}}};
  u.traces = {tf({}, true, 0), tf({"A"}, false, 1), tf({"A", "B"}, false, 2)};
  auto r = check_conditions_rw(u);
  CHECK(failed(r, "C"));
  CHECK(failed(r, "M"));
  CHECK_FALSE(failed(r, "U"));
  CHECK_FALSE(check_direct(u).pass());
}

TEST_CASE("conditions: completeness covers singleton culprits inside the corrupted set") {
  Universe u;
  u.parties = {"A", "B"};
  u.verdicts = {{}, {{"A"}}, {{"B"}}, {{"A"}}};
  u.traces = {tf({}, true, 0), tf({"A"}, false, 1), tf({"B"}, false, 2), tf({"A", "B"}, false, 3)};
  CHECK(apv(u, 3) == Verdict{{"A"}, {"B"}});
  CHECK_FALSE(check_direct(u).pass());
  auto r = check_conditions_rw(u);
  CHECK(r.failed_conditions() == std::vector<std::string>{"C"});
}

TEST_CASE("conditions: a smaller violating coalition fails minimality") {
  Universe u;
  u.parties = {"A", "B"};
  u.verdicts = {{}, {{"A", "B"}}};
  u.traces = {tf({}, true, 0), tf({"A"}, false, 1), tf({"A", "B"}, false, 1)};
  auto r = check_conditions_rw(u);
  CHECK(failed(r, "M"));
  CHECK(failed(r, "U"));
  CHECK_FALSE(failed(r, "C"));
  CHECK_FALSE(check_direct(u).pass());
}

TEST_CASE("conditions: a consistent rw universe passes every condition") {
  Universe u;
  u.parties = {"A", "B"};
  u.verdicts = {{}, {{"A"}}, {{"B"}}, {{"A"}, {"B"}}};
  u.traces = {tf({}, true, 0), tf({"A"}, false, 1), tf({"B"}, false, 2), tf({"A", "B"}, false, 3),
              tf({"A"}, true, 0)};
  CHECK(check_conditions_rw(u).pass());
  CHECK(check_direct(u).pass());
}

TEST_CASE("derive_lifting_rc: control payloads decide the case relation") {
  Universe u;
  u.parties = {"A", "B"};
  u.relation.kind = RelationSpec::Kind::RC;
  u.verdicts = {{}, {{"A"}}, {{"B"}}, {{"A"}, {"B"}}};
  Term k1 = Term::tuple({p("0"), p("1")}), k2 = Term::tuple({p("0"), p("2")});
  u.traces = {tf({}, true, 0), tf({"A"}, false, 1, {k1}), tf({"B"}, false, 2, {k2}),
              tf({"A", "B"}, false, 3, {k1})};
  auto lr = derive_lifting_rc(u);
  CHECK(lr.R[1][1]);
  CHECK(lr.R[1][3]);
  CHECK(lr.R[3][1]);
  CHECK_FALSE(lr.R[1][2]);
  CHECK_FALSE(lr.R[3][2]);
  CHECK(lr.inconsistencies.empty());
  auto r = check_conditions(u);
  CHECK(failed(r, "SFR"));
  CHECK_FALSE(check_direct(u).pass());

  u.traces.push_back(tf({"A", "B"}, false, 3, {k2}));
  auto lr2 = derive_lifting_rc(u);
  CHECK_FALSE(lr2.inconsistencies.empty());
  CHECK(failed(check_conditions(u), "RL"));
}

TEST_CASE("property: rw relation is reflexive and transitive") {
  std::mt19937 rng(11);
  for (int n = 0; n < 200; ++n) {
    Universe u = random_rw_universe(rng);
    for (std::size_t a = 0; a < u.traces.size(); ++a) {
      CHECK(relate(u, a, a));
      for (std::size_t b = 0; b < u.traces.size(); ++b)
        for (std::size_t c = 0; c < u.traces.size(); ++c)
          if (relate(u, a, b) && relate(u, b, c)) CHECK(relate(u, a, c));
    }
  }
}

TEST_CASE("property: apv agrees with the definition and blames only corrupted parties") {
  std::mt19937 rng(5);
  for (int n = 0; n < 300; ++n) {
    Universe u = random_rw_universe(rng);
    for (std::size_t t = 0; t < u.traces.size(); ++t) {
      Verdict v = apv(u, t);
      CHECK(v == apv_oracle(u, t));
      CHECK(v.empty() == u.traces[t].phi);
      for (const auto& s : v) CHECK(std::includes(u.traces[t].corrupted.begin(), u.traces[t].corrupted.end(),
                                                  s.begin(), s.end()));
    }
  }
}
