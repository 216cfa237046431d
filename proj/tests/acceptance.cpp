// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include "support.hpp"
#include "veracct/accountability.hpp"
#include "veracct/deduction.hpp"
#include "veracct/parser.hpp"
#include "veracct/selfcomp.hpp"

using namespace veracct;
using namespace veracct::testing;

namespace {

int failures = 0;

void line(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %d  %-34s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

bool subset(const PartySet& a, const PartySet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

Verdict minimal(const std::vector<PartySet>& sets) {
  Verdict out;
  for (const auto& s : sets)
    if (std::none_of(sets.begin(), sets.end(), [&](const PartySet& o) { return o != s && subset(o, s); }))
      out.insert(s);
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 1, 2 and 7: corpus outcomes, agreement, determinism.

void corpus_criteria() {
  auto start = std::chrono::steady_clock::now();
  auto first = run_corpus(VERACCT_CORPUS_DIR, jobs());
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto second = run_corpus(VERACCT_CORPUS_DIR, jobs());

  std::size_t matched = 0, agreed = 0;
  std::string bad;
  for (const auto& r : first) {
    matched += r.match;
    agreed += r.agree;
    if (!r.match) bad += " " + r.entry.name + ": " + r.why + ";";
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu/%zu models as expected, %.1fs (limit 300s)", matched, first.size(), secs);
  line(1, "corpus outcomes", matched == first.size() && secs < 300.0, buf + bad);
  std::snprintf(buf, sizeof buf, "%zu/%zu models: conditions pass iff direct passes", agreed, first.size());
  line(2, "direct-definition agreement", agreed == first.size(), buf);
  bool same = dump(corpus_json(first)) == dump(corpus_json(second));
  line(7, "determinism", same, same ? "two corpus runs gave byte-identical JSON" : "corpus JSON differs between runs");
}

// ---------------------------------------------------------------------------
// Criterion 3: metatests over random micro-models.

struct Micro {
  std::vector<std::string> parties;
  std::vector<PartySet> corrupted;
  std::vector<bool> violating;
  std::vector<int> control;  // -1 for none
  std::vector<std::size_t> case_of;
  std::vector<Verdict> verdicts;
};

Model micro_base() {
  return parse_model(
      "parties: A, B, C\nmain = event Violation()\nproperty: All #i. Violation()@i ==> F\n"
      "verdict:\n  case otherwise -> {}\n");
}

Universe micro_universe(const Micro& mm, const Model& base, RelationSpec::Kind rel) {
  Model m = base;
  m.parties = mm.parties;
  m.relation.kind = rel;
  m.verdict.clear();
  for (std::size_t k = 0; k < mm.verdicts.size(); ++k) {
    Term i = fm::tvar("i");
    m.verdict.push_back(
        VerdictCase{fm::exists({i}, fm::action("Obs", {Term::pub(std::to_string(k))}, i)), mm.verdicts[k], ""});
  }
  std::vector<Trace> traces;
  for (std::size_t t = 0; t < mm.corrupted.size(); ++t) {
    Trace tr;
    for (const auto& p : mm.corrupted[t]) tr.steps.push_back(TraceStep{{{"Corrupted", {Term::pub(p)}}}, "", ""});
    if (mm.control[t] >= 0)
      tr.steps.push_back(TraceStep{{{"Control", {Term::pub("c" + std::to_string(mm.control[t]))}}}, "", ""});
    tr.steps.push_back(TraceStep{{{"Obs", {Term::pub(std::to_string(mm.case_of[t]))}}}, "", ""});
    if (mm.violating[t]) tr.steps.push_back(TraceStep{{{"Violation", {}}}, "", ""});
    traces.push_back(std::move(tr));
  }
  return build_universe(m, traces);
}

// Drops unpopulated cases and renumbers the rest.
void compact(Micro& mm) {
  std::vector<std::size_t> remap(mm.verdicts.size(), SIZE_MAX);
  std::vector<Verdict> vs;
  for (std::size_t t = 0; t < mm.case_of.size(); ++t) {
    auto& c = mm.case_of[t];
    if (remap[c] == SIZE_MAX) {
      remap[c] = vs.size();
      vs.push_back(mm.verdicts[c]);
    }
    c = remap[c];
  }
  mm.verdicts = std::move(vs);
}

// Groups traces by their verdict under the intended semantics.
void cases_from(Micro& mm, const std::vector<Verdict>& correct, const std::vector<int>& key_extra) {
  std::map<std::pair<Verdict, int>, std::size_t> ids;
  mm.case_of.clear();
  mm.verdicts.clear();
  for (std::size_t t = 0; t < correct.size(); ++t) {
    auto key = std::make_pair(correct[t], correct[t].empty() ? -1 : key_extra[t]);
    auto it = ids.find(key);
    if (it == ids.end()) {
      it = ids.emplace(key, mm.verdicts.size()).first;
      mm.verdicts.push_back(correct[t]);
    }
    mm.case_of.push_back(it->second);
  }
}

PartySet random_set(std::mt19937& rng, const std::vector<std::string>& parties, bool nonempty) {
  while (true) {
    PartySet s;
    for (const auto& p : parties)
      if (rng() % 2) s.insert(p);
    if (!nonempty || !s.empty()) return s;
  }
}

Micro random_rw(std::mt19937& rng) {
  Micro mm;
  mm.parties = rng() % 2 ? std::vector<std::string>{"A", "B"} : std::vector<std::string>{"A", "B", "C"};
  std::size_t n = 1 + rng() % 50;
  for (std::size_t t = 0; t < n; ++t) {
    PartySet s = random_set(rng, mm.parties, false);
    mm.violating.push_back(s.empty() ? rng() % 10 == 0 : rng() % 5 < 3);
    mm.corrupted.push_back(std::move(s));
    mm.control.push_back(-1);
  }
  std::vector<Verdict> correct;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<PartySet> c;
    if (mm.violating[t])
      for (std::size_t k = 0; k < n; ++k)
        if (mm.violating[k] && subset(mm.corrupted[k], mm.corrupted[t])) c.push_back(mm.corrupted[k]);
    correct.push_back(minimal(c));
  }
  cases_from(mm, correct, std::vector<int>(n, 0));
  switch (rng() % 5) {
    case 0: {  // wrong verdict for one case
      std::vector<PartySet> c;
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) c.push_back(random_set(rng, mm.parties, true));
      mm.verdicts[rng() % mm.verdicts.size()] = minimal(c);
      break;
    }
    case 1:  // one trace in the wrong case
      mm.case_of[rng() % n] = rng() % mm.verdicts.size();
      break;
    case 2: {  // two cases merged
      std::size_t a = rng() % mm.verdicts.size(), b = rng() % mm.verdicts.size();
      for (auto& c : mm.case_of)
        if (c == b) c = a;
      break;
    }
    case 3: {  // one case split, same verdict
      std::size_t a = mm.case_of[rng() % n];
      mm.verdicts.push_back(mm.verdicts[a]);
      for (auto& c : mm.case_of)
        if (c == a && rng() % 2) c = mm.verdicts.size() - 1;
      break;
    }
    default:
      break;
  }
  compact(mm);
  return mm;
}

// r_c micro-models: every trace carries one control payload, each control
// class has at most one case with a non-empty verdict and that case covers
// no other class, and verdicts are empty or singleton.
Micro random_rc(std::mt19937& rng) {
  Micro mm;
  mm.parties = rng() % 2 ? std::vector<std::string>{"A", "B"} : std::vector<std::string>{"A", "B", "C"};
  int classes = 1 + static_cast<int>(rng() % 3);
  std::vector<std::optional<PartySet>> culprit(static_cast<std::size_t>(classes));
  for (auto& c : culprit)
    if (rng() % 4) c = random_set(rng, mm.parties, true);
  std::size_t n = 1 + rng() % 50;
  for (std::size_t t = 0; t < n; ++t) {
    int c = static_cast<int>(rng() % static_cast<unsigned>(classes));
    const auto& cul = culprit[static_cast<std::size_t>(c)];
    bool viol = cul && rng() % 3 != 0;
    PartySet s = random_set(rng, mm.parties, false);
    if (viol && rng() % 10) s.insert(cul->begin(), cul->end());
    mm.corrupted.push_back(s);
    mm.violating.push_back(viol);
    mm.control.push_back(c);
  }
  // Make sure every culprit set is realized exactly where violations occur.
  for (int c = 0; c < classes; ++c) {
    const auto& cul = culprit[static_cast<std::size_t>(c)];
    bool any = false;
    for (std::size_t t = 0; t < mm.control.size(); ++t) any |= mm.control[t] == c && mm.violating[t];
    if (cul && any && rng() % 10) {
      mm.corrupted.push_back(*cul);
      mm.violating.push_back(true);
      mm.control.push_back(c);
    }
  }
  n = mm.corrupted.size();
  std::vector<Verdict> correct;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<PartySet> c;
    if (mm.violating[t])
      for (std::size_t k = 0; k < n; ++k)
        if (mm.violating[k] && mm.control[k] == mm.control[t]) c.push_back(mm.corrupted[k]);
    Verdict v = minimal(c);
    if (v.size() > 1) v = {*v.begin()};
    correct.push_back(v);
  }
  cases_from(mm, correct, mm.control);
  auto class_of = [&](std::size_t cs) {
    std::set<int> cl;
    for (std::size_t t = 0; t < n; ++t)
      if (mm.case_of[t] == cs) cl.insert(mm.control[t]);
    return cl;
  };
  switch (rng() % 4) {
    case 0: {  // wrong verdict for one case
      std::size_t cs = rng() % mm.verdicts.size();
      Verdict v;
      if (rng() % 3) v = {random_set(rng, mm.parties, true)};
      if (!v.empty() && class_of(cs).size() > 1) break;
      mm.verdicts[cs] = v;
      break;
    }
    case 1: {  // one trace in the wrong case
      std::size_t t = rng() % n, cs = rng() % mm.verdicts.size();
      if (mm.verdicts[cs].empty() || class_of(cs) == std::set<int>{mm.control[t]}) mm.case_of[t] = cs;
      break;
    }
    default:
      break;
  }
  compact(mm);
  return mm;
}

std::string describe(const Micro& mm, const Universe& u) {
  std::string out = "micro-model:\n";
  for (std::size_t k = 0; k < mm.verdicts.size(); ++k) out += "  case " + std::to_string(k) + " -> " + verdict_str(mm.verdicts[k]) + "\n";
  for (std::size_t t = 0; t < mm.corrupted.size(); ++t) {
    PartySet s = mm.corrupted[t];
    std::string cs;
    for (const auto& p : s) cs += p;
    out += "  trace " + std::to_string(t) + ": case " + std::to_string(mm.case_of[t]) + " corrupted {" + cs + "}" +
           (mm.violating[t] ? " violating" : "") + (mm.control[t] >= 0 ? " c" + std::to_string(mm.control[t]) : "") +
           " apv " + verdict_str(apv(u, t)) + "\n";
  }
  for (const auto& e : check_conditions(u).entries)
    if (e.status == "fail") out += "  failed " + e.name + (e.witnesses.empty() ? "" : ": " + e.witnesses[0].detail) + "\n";
  return out;
}

void metatest(RelationSpec::Kind rel, const char* label, unsigned seed) {
  const int runs = 1000;
  Model base = micro_base();
  std::mt19937 rng(seed);
  int both_pass = 0, both_fail = 0, discrepancies = 0;
  std::string first;
  for (int r = 0; r < runs; ++r) {
    Micro mm = rel == RelationSpec::Kind::RW ? random_rw(rng) : random_rc(rng);
    Universe u = micro_universe(mm, base, rel);
    bool cond = check_conditions(u).pass();
    bool direct = check_direct(u).pass();
    if (cond != direct) {
      if (std::getenv("VERACCT_ACCEPTANCE_VERBOSE")) std::fputs(describe(mm, u).c_str(), stdout);
      if (!discrepancies++) first = " first at model " + std::to_string(r) + (cond ? " (conditions pass, direct fails)" : " (conditions fail, direct passes)");
    } else {
      (cond ? both_pass : both_fail)++;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d models, %d pass/pass, %d fail/fail, %d discrepancies", runs, both_pass,
                both_fail, discrepancies);
  line(3, std::string("metatest ") + label, discrepancies == 0, buf + first);
}

// ---------------------------------------------------------------------------
// Criterion 4: apv properties.

void apv_criteria() {
  std::size_t traces = 0, bad_empty = 0, bad_antichain = 0;
  for (const auto& e : load_corpus(VERACCT_CORPUS_DIR)) {
    Model m = load_model(std::string(VERACCT_CORPUS_DIR) + "/" + e.file);
    TraceSet ts = explore(m, m.bounds, jobs());
    Universe u = build_universe(m, ts.traces, jobs());
    for (std::size_t t = 0; t < u.traces.size(); ++t) {
      Verdict v = apv(u, t);
      ++traces;
      if (v.empty() != u.traces[t].phi) ++bad_empty;
      for (const auto& a : v)
        for (const auto& b : v)
          if (a != b && subset(a, b)) ++bad_antichain;
    }
  }
  Model doc = corpus_model("two_doctors");
  TraceSet ts = explore(doc, doc.bounds, jobs());
  Universe u = build_universe(doc, ts.traces, jobs());
  std::string scenario = "[Corrupted('D1')|][Corrupted('D2')|][Corrupted('D3')|][Execute('D1', 'Exceptional')|M]"
                         "[Execute('D2', 'Exceptional')|M]";
  std::optional<Verdict> got;
  for (std::size_t t = 0; t < ts.traces.size(); ++t)
    if (ts.traces[t].key() == scenario) got = apv(u, t);
  bool doctors = got && *got == Verdict{{"D1"}, {"D2"}};
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu traces, %zu emptiness violations, %zu antichain violations; two doctors: %s",
                traces, bad_empty, bad_antichain, got ? verdict_str(*got).c_str() : "trace not explored");
  line(4, "apv properties", bad_empty == 0 && bad_antichain == 0 && doctors, buf);
}

// ---------------------------------------------------------------------------
// Criterion 5: deduction.

Term fn(const char* s, std::vector<Term> a) { return Term::app(s, std::move(a)); }

Term random_msg(std::mt19937& rng, const std::vector<Term>& atoms, int depth) {
  if (depth == 0 || rng() % 3 == 0) return atoms[rng() % atoms.size()];
  Term a = random_msg(rng, atoms, depth - 1), b = random_msg(rng, atoms, depth - 1);
  switch (rng() % 4) {
    case 0: return Term::pair(a, b);
    case 1: return fn("senc", {a, b});
    case 2: return fn("h", {a});
    default: return fn("sdec", {a, b});
  }
}

void deduction_criteria() {
  Signature sig;
  sig.add_function({"senc", 2, false});
  sig.add_function({"sdec", 2, false});
  sig.add_function({"h", 1, false});
  sig.add_function({"sk", 1, true});
  Term m = Term::var("m"), k = Term::var("k");
  RewriteSystem rs = orient_theory({{fn("sdec", {fn("senc", {m, k}), k}), m}});
  Term k1 = Term::fresh("k1"), k2 = Term::fresh("k2"), k3 = Term::fresh("k3"), k4 = Term::fresh("k4");

  Frame example{{k1, k2}, {fn("senc", {k2, k1}), k1}};
  bool derives_k2 = deducible(example, k2, rs, sig);
  bool restricted = !deducible(Frame{{k1}, {fn("h", {k1})}}, k1, rs, sig);
  bool priv = !deducible(Frame{{}, {Term::pub("a")}}, fn("sk", {Term::pub("a")}), rs, sig);

  std::mt19937 rng(500);
  const int runs = 500;
  int agree = 0, derivable = 0;
  std::vector<Term> left{k1, k2, Term::pub("a")}, right{k3, k4, Term::pub("a"), Term::pub("b")};
  for (int r = 0; r < runs; ++r) {
    Frame other{{k1, k2, k3, k4}, {}}, joint = other;
    for (int j = 1 + static_cast<int>(rng() % 3); j > 0; --j) other.outputs.push_back(normalize(random_msg(rng, right, 2), rs));
    for (int j = 1 + static_cast<int>(rng() % 3); j > 0; --j) joint.outputs.push_back(normalize(random_msg(rng, left, 2), rs));
    joint.outputs.insert(joint.outputs.end(), other.outputs.begin(), other.outputs.end());
    Term goal = random_msg(rng, right, 2);
    bool a = deducible(other, goal, rs, sig), b = deducible(joint, goal, rs, sig);
    agree += a == b;
    derivable += a;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "k2 %s, restricted %s, private %s; strengthening %d/%d agree (%d derivable)",
                derives_k2 ? "derived" : "missing", restricted ? "underivable" : "derivable",
                priv ? "underivable" : "derivable", agree, runs, derivable);
  line(5, "deduction", derives_k2 && restricted && priv && agree == runs, buf);
}

// ---------------------------------------------------------------------------
// Criterion 6: self-composition.

void selfcomp_criteria() {
  struct Run {
    const char* name;
    std::size_t max_pairs;
  };
  std::string detail;
  bool ok = true;
  std::size_t populated = 0;
  std::mt19937 rng(6);
  int fuzzed = 0, rejected = 0;
  for (Run r : {Run{"monitor_fixed", 2000000}, Run{"monitor_faulty", 2000000}, Run{"monitor_replication", 300000},
                Run{"accountable_algorithms", 2000000}}) {
    Model m = corpus_model(r.name);
    TraceSet ts = explore(m, m.bounds, jobs());
    Universe u = build_universe(m, ts.traces, jobs());
    SelfcompReport rep = run_selfcomp(m, ts, u, false, r.max_pairs, jobs());
    std::size_t dis = 0;
    for (const auto& e : rep.entries) {
      if (e.status == "disagree") ++dis;
      if (e.status != "unknown") ++populated;
    }
    ok &= dis == 0 && rep.alpha_ok;
    detail += std::string(r.name) + (dis || !rep.alpha_ok ? " disagrees; " : " agrees; ");

    // Interleave two executions so that their intervals overlap.
    while (fuzzed < 100 && ts.traces.size() > 1 && std::string(r.name) == "monitor_fixed") {
      Trace a = annotate(ts.traces[rng() % ts.traces.size()], execution_id(1));
      Trace b = annotate(ts.traces[rng() % ts.traces.size()], execution_id(2));
      Trace mixed;
      std::size_t i = 0, j = 0;
      while (i < a.size() || j < b.size()) {
        bool take_a = j == b.size() || (i < a.size() && rng() % 2);
        mixed.steps.push_back(take_a ? a.steps[i++] : b.steps[j++]);
      }
      bool sequential = mixed.steps[a.size() - 1].facts == a.steps.back().facts ||
                        mixed.steps[b.size() - 1].facts == b.steps.back().facts;
      if (sequential) continue;
      ++fuzzed;
      rejected += !alpha_seq_holds(mixed);
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%zu populated case pairs; alpha_seq rejects %d/%d overlapping interleavings",
                populated, rejected, fuzzed);
  line(6, "self-composition", ok && fuzzed == 100 && rejected == 100, detail + buf);
}

}  // namespace

int main() {
  corpus_criteria();
  metatest(RelationSpec::Kind::RW, "rw", 31);
  metatest(RelationSpec::Kind::RC, "rc", 32);
  apv_criteria();
  deduction_criteria();
  selfcomp_criteria();
  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}
