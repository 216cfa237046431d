#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracct/formula.hpp"
#include "veracct/process.hpp"
#include "veracct/term.hpp"

namespace veracct {

using PartySet = std::set<std::string>;
using Verdict = std::set<PartySet>;

std::string verdict_str(const Verdict& v);

struct Predicate {
  std::string name;
  std::vector<std::string> params;
  FormulaPtr body;  // quantifier-free, over Var(params)
};

struct VerdictCase {
  FormulaPtr omega;
  Verdict verdict;
  std::string source;  // formula text as written
};

struct RelationSpec {
  enum class Kind { RW, RC, Custom };
  Kind kind = Kind::RW;
  std::vector<std::vector<bool>> lifting;  // Custom only

  std::string str() const;
};

struct ExplorationBounds {
  int max_steps = 8;
  int repl_unfold = 1;
  int synth_depth = 2;
  std::size_t max_traces = 200000;
  std::size_t max_states = 5000000;
  std::size_t synth_cap = 400;
};

struct ModelOptions {
  std::string corruption_event = "Corrupted";
  std::string control_event = "Control";
  std::vector<std::vector<Term>> forbid_overwrite;  // key prefixes, as tuple components
  bool record_k = false;
  bool constants_override = false;
  TermSet constants;  // extra atoms offered to input synthesis
};

class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line ? what + " at line " + std::to_string(line) + ", column " + std::to_string(column)
                                : what),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct Model {
  std::string name;
  Signature sig;
  std::vector<Equation> equations;
  RewriteSystem rs;
  std::map<std::string, Predicate> predicates;
  std::vector<std::string> parties;
  std::set<std::string> trusted;
  std::map<std::string, ProcPtr> roles;  // expanded role processes, by party
  ProcPtr main;
  std::vector<VerdictCase> verdict;
  FormulaPtr property;
  std::string property_source;
  RelationSpec relation;
  ExplorationBounds bounds;
  ModelOptions options;
  TermSet public_constants;  // public names occurring in the main process

  std::size_t party_index(const std::string& p) const;
};

bool eval_predicate(const Model& m, const Condition& c);

}  // namespace veracct
