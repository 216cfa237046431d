#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veracct/accountability.hpp"
#include "veracct/formula.hpp"
#include "veracct/model.hpp"
#include "veracct/semantics.hpp"
#include "veracct/trace.hpp"

namespace veracct {

// Init(e) step, each step of t extended with Event(e), Stop(e) step; all tagged with eid e.
Trace annotate(const Trace& t, const Term& eid);

struct ComposedTrace {
  Trace trace;
  std::size_t first = 0, second = 0;  // indices into the source trace set
  Term e1, e2;
};

Term execution_id(int k);

// Ordered pairs (including self-pairs) in canonical order, at most max_pairs of them.
std::vector<ComposedTrace> compose_pairs(const std::vector<Trace>& ts, std::size_t max_pairs = SIZE_MAX);

// (1) every Init(e) has a later Stop(e); (2) Event(e) lies strictly between
// Init(e) and Stop(e); (3) intervals of distinct eids are disjoint.
bool alpha_seq_holds(const Trace& ct);

// Replaces every action atom F@i by F@i & Event(eid)@i.
FormulaPtr rewrite_formula(const FormulaPtr& phi, const Term& eid);

// The steps of ct tagged with eid, without the Event/Init/Stop annotations.
Trace project(const Trace& ct, const Term& eid);

struct RLResult {
  bool value = true;      // computed R_{i,j}
  bool populated = false; // some composed trace matches both observations
  std::optional<std::size_t> witness;  // composed trace index refuting agreement
};

// Evaluates the single-trace RL property on the composed traces: whenever the
// first execution satisfies omega_i and the second omega_j, every pair of
// control payloads across the executions is equal modulo E.
RLResult check_RL_selfcomp(const std::vector<ComposedTrace>& composed, const Model& m, std::size_t i,
                           std::size_t j);

struct SelfcompEntry {
  std::size_t i = 0, j = 0;
  std::string status;  // agree, disagree, unknown
  bool selfcomp = false;
  bool derived = false;
  std::optional<bool> joint;
  std::optional<std::size_t> witness;
};

struct SelfcompReport {
  std::vector<SelfcompEntry> entries;
  std::size_t composed = 0;
  std::size_t joint_composed = 0;
  bool alpha_ok = true;
  std::vector<std::string> warnings;

  bool pass() const;
};

// Composes the explored traces in pairs, evaluates RL for every pair of
// non-empty-verdict cases and compares with the pairwise-derived lifting.
// With `joint`, additionally explores the second execution from the
// adversary knowledge left by the first and reports disagreements.
SelfcompReport run_selfcomp(const Model& m, const TraceSet& ts, const Universe& u, bool joint = false,
                            std::size_t max_pairs = 2000000, int jobs = 1);

// Joint exploration: second run starts from the first run's names and frame.
std::vector<ComposedTrace> explore_joint(const Model& m, const ExplorationBounds& b, std::size_t max_pairs);

}  // namespace veracct
