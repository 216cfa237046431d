#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracct/model.hpp"
#include "veracct/semantics.hpp"
#include "veracct/tracelogic.hpp"

namespace veracct {

class VerdictError : public std::runtime_error {
 public:
  enum class Kind { NoCaseMatches, MultipleCasesMatch };
  VerdictError(Kind k, std::vector<std::size_t> cases, const std::string& what)
      : std::runtime_error(what), kind(k), cases(std::move(cases)) {}
  Kind kind;
  std::vector<std::size_t> cases;
};

// Everything the accountability checks need to know about one trace.
struct TraceFacts {
  PartySet corrupted;
  bool phi = true;                  // t ⊨ φ
  std::vector<std::size_t> cases;   // indices i with ω_i(t), ascending
  std::vector<Term> controls;       // Control payloads, normalized, sorted, unique
  std::string phi_witness;          // valuation falsifying φ, if any
};

// A bounded trace universe with a verdict function, abstracted from the
// traces themselves. Micro-models for the metatests are built directly.
struct Universe {
  std::vector<std::string> parties;
  std::vector<Verdict> verdicts;  // V_i per case
  std::vector<TraceFacts> traces;
  RelationSpec relation;
};

Universe build_universe(const Model& m, const std::vector<Trace>& traces, int jobs = 1);

Verdict verdict_of(const Universe& u, std::size_t t);
Verdict verdict_of(const Trace& t, const std::vector<VerdictCase>& vf, const RewriteSystem& rs,
                   const DomainPolicy& policy = {});

bool relate(const Universe& u, std::size_t t, std::size_t t2);
bool relate(const Trace& t, const Trace& t2, const RelationSpec& spec, const Model& m);

Verdict apv(const Universe& u, std::size_t t);
Verdict apv(const std::vector<Trace>& ts, const Trace& t, const FormulaPtr& phi, const RelationSpec& spec,
            const Model& m);

struct Witness {
  std::vector<std::size_t> traces;
  std::string detail;
};

struct ConditionEntry {
  std::string name;                 // XH, XC, SF, SFS, SFR, V, M, U, C, RL, RS
  std::vector<std::size_t> cases;
  std::string status;               // pass, fail, unknown, assumed
  std::vector<Witness> witnesses;   // at least one when failing
  std::string note;
};

struct ConditionReport {
  std::string table;  // "rw" or "general"
  std::vector<ConditionEntry> entries;
  std::vector<std::vector<bool>> lifting;  // R, general table only
  std::vector<std::string> warnings;
  bool pass() const;
  std::vector<std::string> failed_conditions() const;
};

struct Mismatch {
  std::size_t trace;
  std::string verdict;  // rendered verdict, or the verdict function's error
  std::string apv;
};

struct DirectReport {
  std::vector<Mismatch> mismatches;
  bool pass() const { return mismatches.empty(); }
};

DirectReport check_direct(const Universe& u);
ConditionReport check_conditions_rw(const Universe& u);

struct LiftingResult {
  std::vector<std::vector<bool>> R;
  std::vector<std::vector<bool>> known;  // false where a case pair is unpopulated
  std::vector<Witness> inconsistencies;  // RL: mixed related and unrelated pairs
  std::vector<std::pair<std::size_t, std::size_t>> inconsistent_pairs;
  std::vector<std::string> diagnostics;
};

LiftingResult derive_lifting_rc(const Universe& u);

// RL is taken from `rl` when given (derived or self-composition results);
// otherwise it is reported as assumed for the supplied matrix.
ConditionReport check_conditions_general(const Universe& u, const std::vector<std::vector<bool>>& R,
                                         const LiftingResult* rl = nullptr);

// Runs the table that fits the universe's relation.
ConditionReport check_conditions(const Universe& u);

}  // namespace veracct
