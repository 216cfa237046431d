#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "veracct/deduction.hpp"
#include "veracct/model.hpp"
#include "veracct/trace.hpp"

namespace veracct {

struct Running {
  ProcPtr proc;
  std::string owner;  // party whose role this process belongs to, empty otherwise
};

struct Configuration {
  TermSet names;                    // 𝒳, fresh names used so far
  std::map<Term, Term> store;       // 𝒮, normalized keys and values
  std::vector<Running> procs;       // 𝒫, kept sorted by (text, owner)
  std::vector<Term> outputs;        // σ, in output order; ñ = 𝒳
  TermSet locks;                    // ℒ
  std::shared_ptr<const KnowledgeBase> kb;

  Frame frame() const { return Frame{names, outputs}; }
  std::string key() const;
};

struct Transition {
  std::vector<Fact> label;  // empty for silent steps
  std::string by;
  Configuration next;
  bool truncated = false;  // input synthesis hit its cap
};

struct StepOptions {
  int synth_depth = 2;
  std::size_t synth_cap = 400;
  TermSet constants;
  bool record_k = false;
  // Output to the adversary on a deducible channel is applied eagerly when
  // K-facts are not recorded; it only grows knowledge, so traces are unchanged.
  bool eager_output = true;
};

StepOptions step_options(const Model& m, const ExplorationBounds& b);

// Applies the silent structural rules (Nil, Par, Repl up to the unfolding
// bound, New, Cond, Choice, role tags) until none applies. Choice yields
// several configurations.
std::vector<Configuration> settle(Configuration c, const Model& m, const ExplorationBounds& b,
                                  const StepOptions& opt);

std::vector<Configuration> initial_configurations(const Model& m, const ExplorationBounds& b,
                                                  const StepOptions& opt);

// All one-step successors of a settled configuration, each settled again.
std::vector<Transition> step(const Configuration& c, const Model& m, const ExplorationBounds& b,
                             const StepOptions& opt);

struct TraceSet {
  std::vector<Trace> traces;            // canonical, deduplicated, sorted by key
  std::vector<std::string> final_states;  // one representative final configuration per trace
  bool exhaustive = true;
  std::vector<std::string> warnings;
  ExplorationBounds bounds;
  std::size_t states = 0;
};

// Bounded exploration. Results do not depend on `jobs` unless a cap truncates.
TraceSet explore(const Model& m, const ExplorationBounds& b, int jobs = 1);
TraceSet explore(const Model& m);

}  // namespace veracct
