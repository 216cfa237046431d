#include "veracct/accountability.hpp"

#include <algorithm>
#include <map>
#include <thread>

namespace veracct {

namespace {

std::string set_str(const PartySet& s) {
  std::string r = "{";
  for (const auto& p : s) r += (r.size() > 1 ? "," : "") + p;
  return r + "}";
}

PartySet union_of(const Verdict& v) {
  PartySet u;
  for (const auto& s : v) u.insert(s.begin(), s.end());
  return u;
}

bool subset(const PartySet& a, const PartySet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

bool has_case(const TraceFacts& t, std::size_t i) {
  return std::binary_search(t.cases.begin(), t.cases.end(), i);
}

bool controls_agree(const std::vector<Term>& a, const std::vector<Term>& b) {
  for (const auto& p : a)
    for (const auto& q : b)
      if (p != q) return false;
  return true;
}

// Minimal elements under set inclusion.
Verdict minimal(const std::vector<PartySet>& sets) {
  Verdict out;
  for (const auto& s : sets) {
    bool dominated = false;
    for (const auto& o : sets)
      if (o != s && subset(o, s)) {
        dominated = true;
        break;
      }
    if (!dominated) out.insert(s);
  }
  return out;
}

TraceFacts facts_of(const Model& m, const Trace& t, const DomainPolicy& policy) {
  TraceFacts f;
  f.corrupted = corrupted(t, m.options.corruption_event, m.parties);
  ForallResult r = holds_forall(t, m.property, m.rs, policy);
  f.phi = r.holds;
  if (r.counter) f.phi_witness = r.counter->str();
  for (std::size_t i = 0; i < m.verdict.size(); ++i)
    if (satisfies(t, {}, m.verdict[i].omega, m.rs, policy)) f.cases.push_back(i);
  TermSet controls;
  for (const auto& st : t.steps)
    for (const auto& fact : st.facts)
      if (fact.name == m.options.control_event) {
        std::vector<Term> args;
        for (const auto& a : fact.args) args.push_back(normalize(a, m.rs));
        controls.insert(args.empty() ? Term() : Term::tuple(args));
      }
  f.controls.assign(controls.begin(), controls.end());
  return f;
}

void add_witness(ConditionEntry& e, Witness w) {
  if (e.witnesses.size() < 3) e.witnesses.push_back(std::move(w));
}

ConditionEntry entry(const std::string& name, std::vector<std::size_t> cases) {
  return ConditionEntry{name, std::move(cases), "pass", {}, ""};
}

void fail(ConditionEntry& e, Witness w) {
  e.status = "fail";
  add_witness(e, std::move(w));
}

void exhaustive_exclusive(const Universe& u, ConditionReport& rep) {
  ConditionEntry xh = entry("XH", {}), xc = entry("XC", {});
  for (std::size_t t = 0; t < u.traces.size(); ++t) {
    const auto& c = u.traces[t].cases;
    if (c.empty()) fail(xh, {{t}, "no case matches"});
    if (c.size() > 1) {
      std::string d = "cases";
      for (auto i : c) d += " " + std::to_string(i);
      d += " all match";
      fail(xc, {{t}, d});
    }
  }
  rep.entries.push_back(std::move(xh));
  rep.entries.push_back(std::move(xc));
}

ConditionEntry verifiability(const Universe& u, std::size_t i) {
  ConditionEntry v = entry("V", {i});
  bool empty = u.verdicts[i].empty();
  for (std::size_t t = 0; t < u.traces.size(); ++t) {
    const auto& tf = u.traces[t];
    if (!has_case(tf, i) || empty == tf.phi) continue;
    fail(v, {{t}, empty ? "empty verdict but the property is violated (" + tf.phi_witness + ")"
                        : "non-empty verdict but the property holds"});
  }
  return v;
}

}  // namespace

bool ConditionReport::pass() const {
  return std::none_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.status == "fail"; });
}

std::vector<std::string> ConditionReport::failed_conditions() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.status == "fail" && std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  return out;
}

Universe build_universe(const Model& m, const std::vector<Trace>& traces, int jobs) {
  Universe u;
  u.parties = m.parties;
  for (const auto& c : m.verdict) u.verdicts.push_back(c.verdict);
  u.relation = m.relation;
  u.traces.resize(traces.size());
  DomainPolicy policy{m.public_constants};
  std::size_t workers = std::max(1, jobs);
  workers = std::min(workers, std::max<std::size_t>(1, traces.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < traces.size(); ++i) u.traces[i] = facts_of(m, traces[i], policy);
    return u;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < traces.size(); i += workers) u.traces[i] = facts_of(m, traces[i], policy);
    });
  for (auto& th : pool) th.join();
  return u;
}

Verdict verdict_of(const Universe& u, std::size_t t) {
  const auto& c = u.traces.at(t).cases;
  if (c.empty()) throw VerdictError(VerdictError::Kind::NoCaseMatches, {}, "NoCaseMatches");
  if (c.size() > 1) throw VerdictError(VerdictError::Kind::MultipleCasesMatch, c, "MultipleCasesMatch");
  return u.verdicts.at(c[0]);
}

Verdict verdict_of(const Trace& t, const std::vector<VerdictCase>& vf, const RewriteSystem& rs,
                   const DomainPolicy& policy) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < vf.size(); ++i)
    if (satisfies(t, {}, vf[i].omega, rs, policy)) hits.push_back(i);
  if (hits.empty()) throw VerdictError(VerdictError::Kind::NoCaseMatches, {}, "NoCaseMatches");
  if (hits.size() > 1) throw VerdictError(VerdictError::Kind::MultipleCasesMatch, hits, "MultipleCasesMatch");
  return vf[hits[0]].verdict;
}

bool relate(const Universe& u, std::size_t t, std::size_t t2) {
  const auto& a = u.traces.at(t);
  const auto& b = u.traces.at(t2);
  switch (u.relation.kind) {
    case RelationSpec::Kind::RW:
      return subset(b.corrupted, a.corrupted);
    case RelationSpec::Kind::RC:
      return controls_agree(a.controls, b.controls);
    case RelationSpec::Kind::Custom:
      for (auto i : a.cases)
        for (auto j : b.cases)
          if (i < u.relation.lifting.size() && j < u.relation.lifting[i].size() && u.relation.lifting[i][j])
            return true;
      return false;
  }
  return false;
}

bool relate(const Trace& t, const Trace& t2, const RelationSpec& spec, const Model& m) {
  Universe u = build_universe(m, {t, t2});
  u.relation = spec;
  return relate(u, 0, 1);
}

Verdict apv(const Universe& u, std::size_t t) {
  if (u.traces.at(t).phi) return {};
  std::vector<PartySet> candidates;
  for (std::size_t k = 0; k < u.traces.size(); ++k) {
    if (u.traces[k].phi || !relate(u, t, k)) continue;
    candidates.push_back(u.traces[k].corrupted);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return minimal(candidates);
}

Verdict apv(const std::vector<Trace>& ts, const Trace& t, const FormulaPtr& phi, const RelationSpec& spec,
            const Model& m) {
  Model mm = m;
  mm.property = phi;
  mm.relation = spec;
  std::vector<Trace> all = ts;
  std::size_t idx = all.size();
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i].key() == t.key()) idx = i;
  if (idx == all.size()) all.push_back(t);
  return apv(build_universe(mm, all), idx);
}

DirectReport check_direct(const Universe& u) {
  DirectReport r;
  // apv depends on t only through φ(t) and the relation's view of t; cache by that view.
  std::map<std::string, Verdict> cache;
  for (std::size_t t = 0; t < u.traces.size(); ++t) {
    const auto& tf = u.traces[t];
    std::string key = tf.phi ? "phi" : "";
    if (!tf.phi) {
      key = set_str(tf.corrupted) + "|";
      for (const auto& c : tf.controls) key += c.str() + ";";
      key += "|";
      for (auto c : tf.cases) key += std::to_string(c) + ";";
    }
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, apv(u, t)).first;
    const Verdict& a = it->second;
    try {
      Verdict v = verdict_of(u, t);
      if (v != a) r.mismatches.push_back({t, verdict_str(v), verdict_str(a)});
    } catch (const VerdictError& e) {
      r.mismatches.push_back({t, e.what(), verdict_str(a)});
    }
  }
  return r;
}

ConditionReport check_conditions_rw(const Universe& u) {
  ConditionReport rep;
  rep.table = "rw";
  exhaustive_exclusive(u, rep);
  std::vector<PartySet> violating;
  std::map<PartySet, std::size_t> violating_at;
  for (std::size_t t = 0; t < u.traces.size(); ++t)
    if (!u.traces[t].phi) violating_at.emplace(u.traces[t].corrupted, t);

  for (std::size_t i = 0; i < u.verdicts.size(); ++i) {
    const Verdict& V = u.verdicts[i];
    if (!V.empty()) {
      ConditionEntry sf = entry("SF", {i});
      for (const auto& S : V)
        if (!violating_at.count(S)) fail(sf, {{}, "no violating trace with corrupted = " + set_str(S)});
      rep.entries.push_back(std::move(sf));
    }
    rep.entries.push_back(verifiability(u, i));
    if (!V.empty()) {
      ConditionEntry mm = entry("M", {i});
      for (const auto& S : V)
        for (const auto& [S2, t] : violating_at)
          if (S2 != S && subset(S2, S))
            fail(mm, {{t}, "violation with corrupted = " + set_str(S2) + " inside " + set_str(S)});
      rep.entries.push_back(std::move(mm));
    }
    ConditionEntry un = entry("U", {i});
    PartySet all = union_of(V);
    for (std::size_t t = 0; t < u.traces.size(); ++t)
      if (has_case(u.traces[t], i) && !subset(all, u.traces[t].corrupted))
        fail(un, {{t}, set_str(all) + " not within corrupted = " + set_str(u.traces[t].corrupted)});
    rep.entries.push_back(std::move(un));
    if (!V.empty()) {
      ConditionEntry c = entry("C", {i});
      for (std::size_t j = 0; j < u.verdicts.size(); ++j) {
        const Verdict& Vj = u.verdicts[j];
        if (Vj.size() != 1) continue;
        const PartySet& S = *Vj.begin();
        if (subset(S, all) && !V.count(S))
          fail(c, {{}, "singleton case " + std::to_string(j) + " blames " + set_str(S) + ", missing from the verdict"});
        for (std::size_t t = 0; t < u.traces.size(); ++t)
          if (has_case(u.traces[t], i) && subset(S, u.traces[t].corrupted) && !V.count(S))
            fail(c, {{t}, "singleton case " + std::to_string(j) + " blames " + set_str(S) + " within corrupted = " +
                              set_str(u.traces[t].corrupted) + ", missing from the verdict"});
      }
      rep.entries.push_back(std::move(c));
    }
  }
  return rep;
}

LiftingResult derive_lifting_rc(const Universe& u) {
  const std::size_t n = u.verdicts.size();
  LiftingResult res;
  res.R.assign(n, std::vector<bool>(n, false));
  res.known.assign(n, std::vector<bool>(n, true));
  // Distinct control signatures per case, with one representative trace each.
  std::vector<std::map<std::vector<Term>, std::size_t>> groups(n);
  std::vector<std::size_t> mixed;
  for (std::size_t t = 0; t < u.traces.size(); ++t) {
    const auto& tf = u.traces[t];
    for (auto i : tf.cases) groups[i].emplace(tf.controls, t);
    if (tf.controls.size() > 1) mixed.push_back(t);
  }
  if (!mixed.empty()) {
    std::string ids;
    for (std::size_t k = 0; k < mixed.size() && k < 5; ++k) ids += (k ? ", " : "") + std::to_string(mixed[k]);
    if (mixed.size() > 5) ids += ", ...";
    res.diagnostics.push_back(std::to_string(mixed.size()) +
                              " traces carry several distinct control payloads and relate only to control-free "
                              "traces (" + ids + ")");
  }
  for (std::size_t i = 0; i < n; ++i) {
    res.R[i][i] = true;
    if (groups[i].empty()) res.diagnostics.push_back("NoTraceInCase: case " + std::to_string(i) + " is unpopulated");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (u.verdicts[i].empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (u.verdicts[j].empty()) continue;
      if (groups[i].empty() || groups[j].empty()) {
        res.known[i][j] = false;
        res.R[i][j] = (i == j);
        continue;
      }
      std::optional<std::pair<std::size_t, std::size_t>> yes, no;
      for (const auto& [ca, ta] : groups[i])
        for (const auto& [cb, tb] : groups[j]) {
          if (controls_agree(ca, cb)) {
            if (!yes) yes = std::make_pair(ta, tb);
          } else if (!no) {
            no = std::make_pair(ta, tb);
          }
        }
      res.R[i][j] = yes && !no;
      if (yes && no) {
        res.inconsistent_pairs.emplace_back(i, j);
        res.inconsistencies.push_back(
            Witness{{yes->first, yes->second, no->first, no->second},
                    "cases " + std::to_string(i) + "," + std::to_string(j) +
                        ": the first trace pair is related, the second is not"});
      }
    }
  }
  return res;
}

ConditionReport check_conditions_general(const Universe& u, const std::vector<std::vector<bool>>& R,
                                         const LiftingResult* rl) {
  ConditionReport rep;
  rep.table = "general";
  rep.lifting = R;
  const std::size_t n = u.verdicts.size();
  auto r = [&](std::size_t i, std::size_t j) { return i < R.size() && j < R[i].size() && R[i][j]; };
  exhaustive_exclusive(u, rep);
  for (std::size_t i = 0; i < n; ++i) {
    const Verdict& V = u.verdicts[i];
    if (V.size() == 1) {
      const PartySet& S = *V.begin();
      ConditionEntry sfs = entry("SFS", {i});
      bool found = false;
      for (std::size_t t = 0; t < u.traces.size() && !found; ++t) {
        const auto& tf = u.traces[t];
        found = has_case(tf, i) && !tf.phi && tf.corrupted == S;
      }
      if (!found) fail(sfs, {{}, "no violating trace in this case with corrupted = " + set_str(S)});
      rep.entries.push_back(std::move(sfs));
    } else if (V.size() >= 2) {
      ConditionEntry sfr = entry("SFR", {i});
      for (const auto& S : V) {
        bool found = false;
        for (std::size_t j = 0; j < n && !found; ++j) found = r(i, j) && u.verdicts[j] == Verdict{S};
        if (!found) fail(sfr, {{}, "no related singleton case blames " + set_str(S)});
      }
      rep.entries.push_back(std::move(sfr));
    }
    rep.entries.push_back(verifiability(u, i));
    if (V.size() == 1) {
      const PartySet& S = *V.begin();
      ConditionEntry mm = entry("M", {i});
      ConditionEntry un = entry("U", {i});
      for (std::size_t t = 0; t < u.traces.size(); ++t) {
        const auto& tf = u.traces[t];
        if (!has_case(tf, i)) continue;
        if (tf.corrupted != S && subset(tf.corrupted, S))
          fail(mm, {{t}, "case matches with corrupted = " + set_str(tf.corrupted) + " inside " + set_str(S)});
        if (!subset(S, tf.corrupted))
          fail(un, {{t}, set_str(S) + " not within corrupted = " + set_str(tf.corrupted)});
      }
      rep.entries.push_back(std::move(mm));
      rep.entries.push_back(std::move(un));
    } else if (V.size() >= 2) {
      ConditionEntry mm = entry("M", {i});
      mm.note = "composite";
      for (const auto& S : V)
        for (const auto& S2 : V)
          if (S2 != S && subset(S2, S)) fail(mm, {{}, set_str(S2) + " and " + set_str(S) + " both in the verdict"});
      rep.entries.push_back(std::move(mm));
      ConditionEntry c = entry("C", {i});
      for (std::size_t j = 0; j < n; ++j) {
        if (!r(i, j) || u.verdicts[j].size() != 1) continue;
        const PartySet& S = *u.verdicts[j].begin();
        bool covered = std::any_of(V.begin(), V.end(), [&](const PartySet& S2) { return subset(S, S2); });
        if (!covered)
          fail(c, {{}, "related singleton case " + std::to_string(j) + " blames " + set_str(S) + ", not covered"});
      }
      rep.entries.push_back(std::move(c));
    }
  }
  // RL over pairs of non-empty-verdict cases.
  for (std::size_t i = 0; i < n; ++i) {
    if (u.verdicts[i].empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (u.verdicts[j].empty()) continue;
      ConditionEntry rle = entry("RL", {i, j});
      if (!rl) {
        rle.status = "assumed";
        rle.note = "lifting supplied by the model";
      } else {
        if (!rl->known[i][j]) {
          rle.status = "unknown";
          rle.note = "case pair unpopulated at these bounds";
        }
        for (std::size_t k = 0; k < rl->inconsistent_pairs.size(); ++k)
          if (rl->inconsistent_pairs[k] == std::make_pair(i, j)) fail(rle, rl->inconsistencies[k]);
      }
      rep.entries.push_back(std::move(rle));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (u.verdicts[i].size() != 1) continue;
    ConditionEntry rs = entry("RS", {i});
    if (!r(i, i)) fail(rs, {{}, "R is not reflexive on this singleton case"});
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && r(i, j)) fail(rs, {{}, "singleton case relates to case " + std::to_string(j)});
    rep.entries.push_back(std::move(rs));
  }
  return rep;
}

ConditionReport check_conditions(const Universe& u) {
  switch (u.relation.kind) {
    case RelationSpec::Kind::RW:
      return check_conditions_rw(u);
    case RelationSpec::Kind::RC: {
      LiftingResult lr = derive_lifting_rc(u);
      ConditionReport rep = check_conditions_general(u, lr.R, &lr);
      rep.warnings = lr.diagnostics;
      return rep;
    }
    case RelationSpec::Kind::Custom:
      return check_conditions_general(u, u.relation.lifting, nullptr);
  }
  return {};
}

}  // namespace veracct
