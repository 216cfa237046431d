#include "veracct/semantics.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_set>

namespace veracct {

namespace {

std::string base_name(const std::string& binder) {
  std::string b = binder.substr(0, binder.find('#'));
  if (!b.empty() && b[0] == '~') b = b.substr(1);
  return b;
}

Term fresh_for(const Configuration& c, const std::string& binder) {
  std::string base = base_name(binder);
  int k = 1;
  while (c.names.count(Term::fresh(base + "." + std::to_string(k)))) ++k;
  return Term::fresh(base + "." + std::to_string(k));
}

const KnowledgeBase& knowledge(Configuration& c, const Model& m) {
  if (!c.kb) c.kb = std::make_shared<const KnowledgeBase>(saturate(c.frame(), m.rs, m.sig));
  return *c.kb;
}

Term ground_normal(const Term& t, const Model& m) {
  if (!t.ground()) throw ModelError("process term is not ground at runtime: " + t.str());
  return normalize(t, m.rs);
}

void sort_procs(Configuration& c) {
  std::sort(c.procs.begin(), c.procs.end(), [](const Running& a, const Running& b) {
    int r = a.proc->str().compare(b.proc->str());
    if (r != 0) return r < 0;
    return a.owner < b.owner;
  });
}

bool forbids_overwrite(const Model& m, const Term& key) {
  auto items = key.tuple_items();
  for (const auto& prefix : m.options.forbid_overwrite) {
    if (prefix.size() > items.size()) continue;
    bool all = true;
    for (std::size_t i = 0; i < prefix.size() && all; ++i) all = equal_mod_E(prefix[i], items[i], m.rs);
    if (all) return true;
  }
  return false;
}

}  // namespace

std::string Configuration::key() const {
  std::string k;
  for (const auto& r : procs) {
    k += r.owner;
    k += ':';
    k += r.proc->str();
    k += '\n';
  }
  k += "S";
  for (const auto& [key, v] : store) k += key.str() + "=" + v.str() + ";";
  k += "\nF";
  std::vector<std::string> outs;
  for (const auto& o : outputs) outs.push_back(o.str());
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  for (const auto& o : outs) k += o + ";";
  k += "\nL";
  for (const auto& l : locks) k += l.str() + ";";
  k += "\nX";
  for (const auto& n : names) k += n.name() + ";";
  return k;
}

StepOptions step_options(const Model& m, const ExplorationBounds& b) {
  StepOptions o;
  o.synth_depth = b.synth_depth;
  o.synth_cap = b.synth_cap;
  o.record_k = m.options.record_k;
  o.eager_output = !m.options.record_k;
  if (m.options.constants_override) {
    o.constants = m.options.constants;
  } else {
    o.constants = m.public_constants;
    o.constants.insert(m.options.constants.begin(), m.options.constants.end());
  }
  return o;
}

std::vector<Configuration> settle(Configuration c, const Model& m, const ExplorationBounds& b,
                                  const StepOptions& opt) {
  std::vector<Configuration> done;
  std::vector<Configuration> work;
  work.push_back(std::move(c));
  while (!work.empty()) {
    Configuration cur = std::move(work.back());
    work.pop_back();
    bool progressed = true;
    bool forked = false;
    while (progressed && !forked) {
      progressed = false;
      for (std::size_t i = 0; i < cur.procs.size() && !progressed && !forked; ++i) {
        const ProcPtr p = cur.procs[i].proc;
        const std::string owner = cur.procs[i].owner;
        switch (p->kind) {
          case Process::Kind::Nil:
            cur.procs.erase(cur.procs.begin() + static_cast<std::ptrdiff_t>(i));
            progressed = true;
            break;
          case Process::Kind::Par:
            cur.procs[i].proc = p->p;
            cur.procs.push_back({p->q, owner});
            progressed = true;
            break;
          case Process::Kind::Repl:
            cur.procs.erase(cur.procs.begin() + static_cast<std::ptrdiff_t>(i));
            for (int k = 0; k < b.repl_unfold; ++k) cur.procs.push_back({p->p, owner});
            progressed = true;
            break;
          case Process::Kind::New: {
            Term n = fresh_for(cur, p->t1.name());
            cur.names.insert(n);
            cur.kb.reset();
            cur.procs[i].proc = substitute(p->p, Substitution{{p->t1.name(), n}});
            progressed = true;
            break;
          }
          case Process::Kind::Cond: {
            Condition inst{p->cond.predicate, {}};
            for (const auto& a : p->cond.args) inst.args.push_back(ground_normal(a, m));
            cur.procs[i].proc = eval_predicate(m, inst) ? p->p : p->q;
            progressed = true;
            break;
          }
          case Process::Kind::Tag:
            cur.procs[i] = {p->p, p->owner};
            progressed = true;
            break;
          case Process::Kind::Choice: {
            Configuration other = cur;
            other.procs[i].proc = p->q;
            cur.procs[i].proc = p->p;
            work.push_back(std::move(other));
            work.push_back(std::move(cur));
            forked = true;
            break;
          }
          case Process::Kind::Out: {
            if (!opt.eager_output) break;
            Term ch = ground_normal(p->t1, m);
            if (!deducible(knowledge(cur, m), ch, m.rs, m.sig)) break;
            cur.outputs.push_back(ground_normal(p->t2, m));
            cur.kb.reset();
            cur.procs[i].proc = p->p;
            progressed = true;
            break;
          }
          default:
            break;
        }
      }
    }
    if (forked) continue;
    sort_procs(cur);
    knowledge(cur, m);
    done.push_back(std::move(cur));
  }
  std::reverse(done.begin(), done.end());
  return done;
}

std::vector<Configuration> initial_configurations(const Model& m, const ExplorationBounds& b,
                                                  const StepOptions& opt) {
  Configuration c;
  c.procs.push_back({m.main, ""});
  return settle(std::move(c), m, b, opt);
}

std::vector<Transition> step(const Configuration& c, const Model& m, const ExplorationBounds& b,
                             const StepOptions& opt) {
  std::vector<Transition> out;
  const KnowledgeBase& kb = *c.kb;
  auto emit = [&](Configuration next, std::vector<Fact> label, const std::string& by, bool truncated) {
    next.kb.reset();
    for (auto& s : settle(std::move(next), m, b, opt)) {
      out.push_back(Transition{label, by, std::move(s), truncated});
    }
  };
  auto with = [&](std::size_t i, ProcPtr cont) {
    Configuration n = c;
    n.procs[i].proc = std::move(cont);
    return n;
  };
  for (std::size_t i = 0; i < c.procs.size(); ++i) {
    const ProcPtr& p = c.procs[i].proc;
    const std::string& owner = c.procs[i].owner;
    switch (p->kind) {
      case Process::Kind::Event: {
        Fact f{p->fact, {}};
        for (const auto& a : p->fact_args) f.args.push_back(ground_normal(a, m));
        emit(with(i, p->p), {f}, owner, false);
        break;
      }
      case Process::Kind::Out: {
        Term ch = ground_normal(p->t1, m);
        Term msg = ground_normal(p->t2, m);
        if (deducible(kb, ch, m.rs, m.sig)) {
          Configuration n = with(i, p->p);
          n.outputs.push_back(msg);
          std::vector<Fact> label;
          if (opt.record_k) label.push_back(Fact{"K", {ch}});
          emit(std::move(n), label, owner, false);
        }
        for (std::size_t j = 0; j < c.procs.size(); ++j) {
          const ProcPtr& q = c.procs[j].proc;
          if (j == i || q->kind != Process::Kind::In) continue;
          if (ground_normal(q->t1, m) != ch) continue;
          auto tau = match_pattern(q->t2, msg, m.rs);
          if (!tau) continue;
          Configuration n = with(i, p->p);
          n.procs[j].proc = substitute(q->p, *tau);
          emit(std::move(n), {}, owner, false);
        }
        break;
      }
      case Process::Kind::In: {
        Term ch = ground_normal(p->t1, m);
        if (!deducible(kb, ch, m.rs, m.sig)) break;
        SynthOptions so;
        so.depth = opt.synth_depth;
        so.constants = opt.constants;
        so.max_candidates = opt.synth_cap;
        SynthResult r = synth_matches(kb, p->t2, m.rs, m.sig, so);
        for (const auto& tau : r.matches) {
          std::vector<Fact> label;
          if (opt.record_k) label.push_back(Fact{"K", {Term::pair(ch, normalize(substitute(p->t2, tau), m.rs))}});
          emit(with(i, substitute(p->p, tau)), label, owner, r.truncated);
        }
        break;
      }
      case Process::Kind::Insert: {
        Term k = ground_normal(p->t1, m);
        if (c.store.count(k) && forbids_overwrite(m, k)) break;
        Configuration n = with(i, p->p);
        n.store[k] = ground_normal(p->t2, m);
        emit(std::move(n), {}, owner, false);
        break;
      }
      case Process::Kind::Delete: {
        Configuration n = with(i, p->p);
        n.store.erase(ground_normal(p->t1, m));
        emit(std::move(n), {}, owner, false);
        break;
      }
      case Process::Kind::Lookup: {
        Term k = ground_normal(p->t1, m);
        auto it = c.store.find(k);
        if (it != c.store.end())
          emit(with(i, substitute(p->p, Substitution{{p->t2.name(), it->second}})), {}, owner, false);
        else
          emit(with(i, p->q), {}, owner, false);
        break;
      }
      case Process::Kind::Lock: {
        Term k = ground_normal(p->t1, m);
        if (c.locks.count(k)) break;
        Configuration n = with(i, p->p);
        n.locks.insert(k);
        emit(std::move(n), {}, owner, false);
        break;
      }
      case Process::Kind::Unlock: {
        Configuration n = with(i, p->p);
        n.locks.erase(ground_normal(p->t1, m));
        emit(std::move(n), {}, owner, false);
        break;
      }
      default:
        break;
    }
  }
  return out;
}

namespace {

struct Hash128 {
  std::uint64_t a, b;
  bool operator==(const Hash128& o) const { return a == o.a && b == o.b; }
};
struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const { return static_cast<std::size_t>(h.a ^ (h.b * 0x9e3779b97f4a7c15ULL)); }
};

Hash128 hash_key(const std::string& s) {
  std::uint64_t fnv = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    fnv ^= ch;
    fnv *= 1099511628211ULL;
  }
  return {static_cast<std::uint64_t>(std::hash<std::string>{}(s)), fnv};
}

struct Node {
  Configuration config;
  std::vector<TraceStep> trace;
};

struct Collector {
  std::map<std::string, std::pair<Trace, std::string>> traces;  // canonical key -> trace, final state
  std::unordered_set<std::string> raw_seen;
  std::size_t states = 0;
  bool truncated_synth = false;
  bool cap_hit = false;

  void record(const std::vector<TraceStep>& steps, const Configuration& c) {
    Trace t{steps};
    std::string raw = t.key();
    std::string state = c.key();
    if (!raw_seen.insert(raw + "\x1f" + state).second) return;
    Trace canon = t.canonical();
    std::string k = canon.key();
    auto it = traces.find(k);
    if (it == traces.end())
      traces.emplace(k, std::make_pair(std::move(canon), state));
    else if (state < it->second.second)
      it->second.second = state;
  }
};

void dfs(std::vector<Node> stack, const Model& m, const ExplorationBounds& b, const StepOptions& opt,
         Collector& col) {
  std::unordered_set<Hash128, Hash128Hasher> visited;
  while (!stack.empty()) {
    Node n = std::move(stack.back());
    stack.pop_back();
    Trace tr{n.trace};
    Hash128 h = hash_key(n.config.key() + "\x1e" + tr.key());
    if (!visited.insert(h).second) continue;
    if (++col.states > b.max_states || col.traces.size() >= b.max_traces) {
      col.cap_hit = true;
      return;
    }
    col.record(n.trace, n.config);
    if (static_cast<int>(n.trace.size()) >= b.max_steps) continue;
    auto succ = step(n.config, m, b, opt);
    for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
      if (it->truncated) col.truncated_synth = true;
      Node child{std::move(it->next), n.trace};
      if (!it->label.empty()) {
        TraceStep st{it->label, it->by, ""};
        std::sort(st.facts.begin(), st.facts.end());
        child.trace.push_back(std::move(st));
      }
      stack.push_back(std::move(child));
    }
  }
}

}  // namespace

TraceSet explore(const Model& m, const ExplorationBounds& b, int jobs) {
  StepOptions opt = step_options(m, b);
  std::vector<Node> roots;
  for (auto& c : initial_configurations(m, b, opt)) roots.push_back(Node{std::move(c), {}});

  std::vector<Collector> cols;
  if (jobs <= 1 || b.max_steps == 0) {
    cols.emplace_back();
    dfs(roots, m, b, opt, cols.back());
  } else {
    // Expand the first level, then split the frontier round-robin over workers.
    Collector head;
    std::vector<Node> frontier;
    for (auto& r : roots) {
      head.record(r.trace, r.config);
      for (auto& t : step(r.config, m, b, opt)) {
        if (t.truncated) head.truncated_synth = true;
        Node child{std::move(t.next), r.trace};
        if (!t.label.empty()) child.trace.push_back(TraceStep{t.label, t.by, ""});
        frontier.push_back(std::move(child));
      }
    }
    std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(1, frontier.size()));
    std::vector<std::vector<Node>> parts(w);
    for (std::size_t i = 0; i < frontier.size(); ++i) parts[i % w].push_back(std::move(frontier[i]));
    cols.resize(w + 1);
    cols[w] = std::move(head);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < w; ++i)
      threads.emplace_back([&, i] { dfs(std::move(parts[i]), m, b, opt, cols[i]); });
    for (auto& t : threads) t.join();
  }

  std::map<std::string, std::pair<Trace, std::string>> merged;
  TraceSet ts;
  ts.bounds = b;
  bool synth = false, cap = false;
  for (auto& c : cols) {
    ts.states += c.states;
    synth = synth || c.truncated_synth;
    cap = cap || c.cap_hit;
    for (auto& [k, v] : c.traces) {
      auto it = merged.find(k);
      if (it == merged.end())
        merged.emplace(k, std::move(v));
      else if (v.second < it->second.second)
        it->second.second = v.second;
    }
  }
  for (auto& [k, v] : merged) {
    ts.traces.push_back(std::move(v.first));
    ts.final_states.push_back(std::move(v.second));
  }
  if (cap) {
    ts.exhaustive = false;
    ts.warnings.push_back("BoundExceeded: trace or state cap reached; the trace set is not exhaustive");
  }
  if (synth) {
    ts.exhaustive = false;
    ts.warnings.push_back("BoundExceeded: input synthesis cap reached; some adversary inputs were not tried");
  }
  return ts;
}

TraceSet explore(const Model& m) { return explore(m, m.bounds, 1); }

}  // namespace veracct
