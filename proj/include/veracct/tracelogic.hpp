#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracct/formula.hpp"
#include "veracct/trace.hpp"

namespace veracct {

struct Valuation {
  std::map<std::string, std::size_t> times;  // temp variables -> trace indices
  Substitution terms;                        // message variables -> ground terms

  std::string str() const;
  friend bool operator==(const Valuation& a, const Valuation& b) {
    return a.times == b.times && a.terms == b.terms;
  }
};

// Message quantifiers range over the subterm closure of the trace's fact
// arguments, plus `extras`.
struct DomainPolicy {
  TermSet extras;
};

class TraceLogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool satisfies(const Trace& t, const Valuation& theta, const FormulaPtr& phi, const RewriteSystem& rs,
               const DomainPolicy& policy = {});

struct ForallResult {
  bool holds = true;
  std::optional<Valuation> counter;  // free and outermost universal variables
};

// Free variables are read as universally quantified.
ForallResult holds_forall(const Trace& t, const FormulaPtr& phi, const RewriteSystem& rs,
                          const DomainPolicy& policy = {});

// Free variables are read as existentially quantified. Returns the witness
// valuation of the free and outermost existential variables.
std::optional<Valuation> holds_exists(const Trace& t, const FormulaPtr& phi, const RewriteSystem& rs,
                                      const DomainPolicy& policy = {});

struct ExistsWitness {
  std::size_t trace_index;
  Valuation valuation;
};

std::optional<ExistsWitness> holds_exists_set(const std::vector<Trace>& ts, const FormulaPtr& phi,
                                              const RewriteSystem& rs, const DomainPolicy& policy = {});

// Message-sort quantified variables must be bound by a positive action atom
// of their quantifier body; returns the first offending variable.
std::optional<std::string> unguarded_variable(const FormulaPtr& phi, const RewriteSystem& rs);

}  // namespace veracct
