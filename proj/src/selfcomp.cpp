#include "veracct/selfcomp.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>
#include <unordered_set>

#include "veracct/tracelogic.hpp"

namespace veracct {

namespace {

const char* const kInit = "Init";
const char* const kStop = "Stop";
const char* const kEvent = "Event";

void append(Trace& out, const Trace& t) { out.steps.insert(out.steps.end(), t.steps.begin(), t.steps.end()); }

// Control(x1..xk)@t1 & Event(e1)@t1 & Control(y1..yl)@t2 & Event(e2)@t2 ==> payloads equal.
FormulaPtr rl_formula(const Model& m, const Term& e1, const Term& e2) {
  std::set<std::size_t> arities;
  if (auto a = m.sig.fact_arity(m.options.control_event)) arities.insert(*a);
  std::vector<FormulaPtr> parts;
  for (auto k : arities)
    for (auto l : arities) {
      std::vector<Term> xs, ys;
      for (std::size_t n = 0; n < k; ++n) xs.push_back(Term::var("x" + std::to_string(n + 1), Sort::Msg));
      for (std::size_t n = 0; n < l; ++n) ys.push_back(Term::var("y" + std::to_string(n + 1), Sort::Msg));
      Term t1 = fm::tvar("t1"), t2 = fm::tvar("t2");
      FormulaPtr pre = fm::conj_all({fm::action(m.options.control_event, xs, t1), fm::action(kEvent, {e1}, t1),
                                     fm::action(m.options.control_event, ys, t2), fm::action(kEvent, {e2}, t2)});
      std::vector<FormulaPtr> eqs;
      if (k == l)
        for (std::size_t n = 0; n < k; ++n) eqs.push_back(fm::eq_term(xs[n], ys[n]));
      FormulaPtr post = k == l ? fm::conj_all(eqs) : fm::falsum();
      std::vector<Term> vars{t1, t2};
      vars.insert(vars.end(), xs.begin(), xs.end());
      vars.insert(vars.end(), ys.begin(), ys.end());
      parts.push_back(fm::forall(vars, fm::implies(pre, post)));
    }
  return fm::conj_all(parts);
}

struct Evaluated {
  std::vector<bool> first, second;  // omega_k^{e1}, omega_k^{e2}
  bool agree = true;
};

struct Evaluator {
  const Model& m;
  std::vector<FormulaPtr> w1, w2;
  FormulaPtr rl;
  DomainPolicy policy;

  Evaluator(const Model& model, const Term& e1, const Term& e2) : m(model), policy{model.public_constants} {
    for (const auto& c : m.verdict) {
      w1.push_back(rewrite_formula(c.omega, e1));
      w2.push_back(rewrite_formula(c.omega, e2));
    }
    rl = rl_formula(m, e1, e2);
  }

  Evaluated operator()(const Trace& ct) const {
    Evaluated ev;
    for (std::size_t k = 0; k < w1.size(); ++k) {
      ev.first.push_back(satisfies(ct, {}, w1[k], m.rs, policy));
      ev.second.push_back(satisfies(ct, {}, w2[k], m.rs, policy));
    }
    ev.agree = holds_forall(ct, rl, m.rs, policy).holds;
    return ev;
  }
};

struct PairTable {
  std::size_t n;
  std::vector<char> populated, refuted;
  std::vector<std::optional<std::size_t>> witness;

  explicit PairTable(std::size_t cases)
      : n(cases), populated(cases * cases, 0), refuted(cases * cases, 0), witness(cases * cases) {}

  void add(const Evaluated& ev, std::size_t idx) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!ev.first[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!ev.second[j]) continue;
        populated[i * n + j] = 1;
        if (!ev.agree && !refuted[i * n + j]) {
          refuted[i * n + j] = 1;
          witness[i * n + j] = idx;
        }
      }
    }
  }

  void merge(const PairTable& o) {
    for (std::size_t k = 0; k < populated.size(); ++k) {
      populated[k] |= o.populated[k];
      if (o.refuted[k] && (!refuted[k] || *o.witness[k] < *witness[k])) witness[k] = o.witness[k];
      refuted[k] |= o.refuted[k];
    }
  }
};

}  // namespace

Term execution_id(int k) { return Term::fresh("eid." + std::to_string(k)); }

Trace annotate(const Trace& t, const Term& eid) {
  Trace out;
  out.steps.push_back(TraceStep{{Fact{kInit, {eid}}}, "", eid.name()});
  for (const auto& st : t.steps) {
    TraceStep ns = st;
    ns.facts.push_back(Fact{kEvent, {eid}});
    std::sort(ns.facts.begin(), ns.facts.end());
    ns.eid = eid.name();
    out.steps.push_back(std::move(ns));
  }
  out.steps.push_back(TraceStep{{Fact{kStop, {eid}}}, "", eid.name()});
  return out;
}

std::vector<ComposedTrace> compose_pairs(const std::vector<Trace>& ts, std::size_t max_pairs) {
  std::vector<ComposedTrace> out;
  Term e1 = execution_id(1), e2 = execution_id(2);
  std::vector<Trace> a1, a2;
  for (const auto& t : ts) {
    a1.push_back(annotate(t, e1));
    a2.push_back(annotate(t, e2));
  }
  for (std::size_t a = 0; a < ts.size(); ++a)
    for (std::size_t b = 0; b < ts.size(); ++b) {
      if (out.size() >= max_pairs) return out;
      ComposedTrace ct{a1[a], a, b, e1, e2};
      append(ct.trace, a2[b]);
      out.push_back(std::move(ct));
    }
  return out;
}

bool alpha_seq_holds(const Trace& ct) {
  std::map<Term, std::vector<std::size_t>> inits, stops, events;
  for (std::size_t k = 0; k < ct.steps.size(); ++k)
    for (const auto& f : ct.steps[k].facts) {
      if (f.args.size() != 1) continue;
      if (f.name == kInit) inits[f.args[0]].push_back(k);
      if (f.name == kStop) stops[f.args[0]].push_back(k);
      if (f.name == kEvent) events[f.args[0]].push_back(k);
    }
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  for (const auto& [e, is] : inits) {
    auto st = stops.find(e);
    if (is.size() != 1 || st == stops.end() || st->second.size() != 1 || st->second[0] <= is[0]) return false;
    intervals.emplace_back(is[0], st->second[0]);
  }
  for (const auto& [e, ss] : stops)
    if (!inits.count(e)) return false;
  for (const auto& [e, ks] : events) {
    auto it = inits.find(e);
    if (it == inits.end()) return false;
    std::size_t lo = it->second[0], hi = stops[e][0];
    for (auto k : ks)
      if (k <= lo || k >= hi) return false;
  }
  std::sort(intervals.begin(), intervals.end());
  for (std::size_t k = 1; k < intervals.size(); ++k)
    if (intervals[k].first <= intervals[k - 1].second) return false;
  return true;
}

FormulaPtr rewrite_formula(const FormulaPtr& phi, const Term& eid) {
  using K = Formula::Kind;
  switch (phi->kind) {
    case K::Action:
      return fm::conj(phi, fm::action(kEvent, {eid}, phi->lhs));
    case K::Not:
      return fm::neg(rewrite_formula(phi->a, eid));
    case K::And:
      return fm::conj(rewrite_formula(phi->a, eid), rewrite_formula(phi->b, eid));
    case K::Or:
      return fm::disj(rewrite_formula(phi->a, eid), rewrite_formula(phi->b, eid));
    case K::Implies:
      return fm::implies(rewrite_formula(phi->a, eid), rewrite_formula(phi->b, eid));
    case K::Exists:
      return fm::exists(phi->vars, rewrite_formula(phi->a, eid));
    case K::Forall:
      return fm::forall(phi->vars, rewrite_formula(phi->a, eid));
    default:
      return phi;
  }
}

Trace project(const Trace& ct, const Term& eid) {
  Trace out;
  for (const auto& st : ct.steps) {
    bool mine = false, marker = false;
    TraceStep ns{{}, st.by, ""};
    for (const auto& f : st.facts) {
      bool tagged = f.args.size() == 1 && f.args[0] == eid;
      if (tagged && f.name == kEvent) {
        mine = true;
        continue;
      }
      if (tagged && (f.name == kInit || f.name == kStop)) marker = true;
      ns.facts.push_back(f);
    }
    if (mine && !marker) out.steps.push_back(std::move(ns));
  }
  return out;
}

RLResult check_RL_selfcomp(const std::vector<ComposedTrace>& composed, const Model& m, std::size_t i,
                           std::size_t j) {
  RLResult r;
  if (composed.empty()) return r;
  std::map<std::pair<Term, Term>, Evaluator> evals;
  for (std::size_t k = 0; k < composed.size(); ++k) {
    const auto& ct = composed[k];
    auto key = std::make_pair(ct.e1, ct.e2);
    auto it = evals.find(key);
    if (it == evals.end()) it = evals.emplace(key, Evaluator(m, ct.e1, ct.e2)).first;
    const Evaluator& ev = it->second;
    if (!satisfies(ct.trace, {}, ev.w1[i], m.rs, ev.policy) || !satisfies(ct.trace, {}, ev.w2[j], m.rs, ev.policy))
      continue;
    r.populated = true;
    if (!holds_forall(ct.trace, ev.rl, m.rs, ev.policy).holds) {
      r.value = false;
      r.witness = k;
      return r;
    }
  }
  return r;
}

std::vector<ComposedTrace> explore_joint(const Model& m, const ExplorationBounds& b, std::size_t max_pairs) {
  StepOptions opt = step_options(m, b);
  Term e1 = execution_id(1), e2 = execution_id(2);
  struct Node {
    Configuration config;
    std::vector<TraceStep> trace;
  };
  auto run = [&](std::vector<Configuration> roots, auto&& visit) {
    std::vector<Node> stack;
    for (auto& c : roots) stack.push_back({std::move(c), {}});
    std::unordered_set<std::string> seen;
    while (!stack.empty()) {
      Node n = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(n.config.key() + "\x1e" + Trace{n.trace}.key()).second) continue;
      if (!visit(n.config, Trace{n.trace})) return;
      if (static_cast<int>(n.trace.size()) >= b.max_steps) continue;
      auto succ = step(n.config, m, b, opt);
      for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
        Node child{std::move(it->next), n.trace};
        if (!it->label.empty()) {
          TraceStep st{it->label, it->by, ""};
          std::sort(st.facts.begin(), st.facts.end());
          child.trace.push_back(std::move(st));
        }
        stack.push_back(std::move(child));
      }
    }
  };

  std::map<std::string, ComposedTrace> out;
  bool full = false;
  run(initial_configurations(m, b, opt), [&](const Configuration& c1, const Trace& t1) {
    Configuration restart = c1;
    restart.procs = {{m.main, ""}};
    restart.store.clear();
    restart.locks.clear();
    Trace first = annotate(t1, e1);
    run(settle(std::move(restart), m, b, opt), [&](const Configuration&, const Trace& t2) {
      ComposedTrace ct{first, 0, 0, e1, e2};
      append(ct.trace, annotate(t2, e2));
      ct.trace = ct.trace.canonical();
      std::string k = ct.trace.key();
      if (!out.count(k)) {
        if (out.size() >= max_pairs) {
          full = true;
          return false;
        }
        out.emplace(std::move(k), std::move(ct));
      }
      return true;
    });
    return !full;
  });
  std::vector<ComposedTrace> v;
  for (auto& [k, ct] : out) v.push_back(std::move(ct));
  return v;
}

bool SelfcompReport::pass() const {
  return alpha_ok && std::none_of(entries.begin(), entries.end(),
                                  [](const SelfcompEntry& e) { return e.status == "disagree"; });
}

SelfcompReport run_selfcomp(const Model& m, const TraceSet& ts, const Universe& u, bool joint, std::size_t max_pairs,
                            int jobs) {
  SelfcompReport rep;
  const std::size_t n = m.verdict.size();
  if (m.sig.has_private_symbols())
    rep.warnings.push_back(
        "model declares private function symbols; composition completeness assumes the adversary cannot apply them");
  LiftingResult lr = derive_lifting_rc(u);

  Term e1 = execution_id(1), e2 = execution_id(2);
  std::vector<Trace> a1, a2;
  for (const auto& t : ts.traces) {
    a1.push_back(annotate(t, e1));
    a2.push_back(annotate(t, e2));
  }
  const std::size_t total = std::min<std::size_t>(max_pairs, ts.traces.size() * ts.traces.size());
  if (total < ts.traces.size() * ts.traces.size())
    rep.warnings.push_back("BoundExceeded: composed pairs capped at " + std::to_string(max_pairs));
  rep.composed = total;
  std::size_t workers = std::max(1, jobs);
  std::vector<PairTable> tables(workers, PairTable(n));
  std::vector<char> alpha(workers, 1);
  std::vector<std::thread> pool;
  auto work = [&](std::size_t w) {
    Evaluator ev(m, e1, e2);
    for (std::size_t idx = w; idx < total; idx += workers) {
      std::size_t a = idx / ts.traces.size(), b = idx % ts.traces.size();
      Trace ct = a1[a];
      append(ct, a2[b]);
      if (!alpha_seq_holds(ct)) alpha[w] = 0;
      tables[w].add(ev(ct), idx);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  PairTable table(n);
  for (const auto& t : tables) table.merge(t);
  rep.alpha_ok = std::all_of(alpha.begin(), alpha.end(), [](char c) { return c != 0; });

  std::optional<PairTable> jt;
  if (joint) {
    auto composed = explore_joint(m, ts.bounds, max_pairs);
    rep.joint_composed = composed.size();
    Evaluator ev(m, e1, e2);
    jt.emplace(n);
    for (std::size_t k = 0; k < composed.size(); ++k) jt->add(ev(composed[k].trace), k);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (u.verdicts[i].empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (u.verdicts[j].empty()) continue;
      SelfcompEntry e;
      e.i = i;
      e.j = j;
      std::size_t k = i * n + j;
      e.selfcomp = !table.refuted[k];
      e.derived = lr.R[i][j];
      e.witness = table.witness[k];
      if (!table.populated[k] || !lr.known[i][j])
        e.status = "unknown";
      else
        e.status = e.selfcomp == e.derived ? "agree" : "disagree";
      if (jt && jt->populated[k]) {
        e.joint = !jt->refuted[k];
        if (table.populated[k] && *e.joint != e.selfcomp)
          rep.warnings.push_back("joint exploration disagrees with post-hoc composition on cases " +
                                 std::to_string(i) + "," + std::to_string(j));
      }
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace veracct
