#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "veracct/term.hpp"

namespace veracct {

struct Frame {
  TermSet restricted;          // ñ
  std::vector<Term> outputs;   // range of σ, in output order
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  const Frame& frame() const { return frame_; }
  const TermSet& derived() const { return derived_; }
  int bound() const { return bound_; }

 private:
  friend KnowledgeBase saturate(const Frame&, const RewriteSystem&, const Signature&, int);
  Frame frame_;
  TermSet derived_;
  int bound_ = 0;
};

// Analysis closure of the frame under destructor applications; terminates
// because every added term is a subterm of an existing one.
KnowledgeBase saturate(const Frame& f, const RewriteSystem& rs, const Signature& sig, int bound = 2);

bool deducible(const KnowledgeBase& kb, const Term& t, const RewriteSystem& rs, const Signature& sig);
bool deducible(const Frame& f, const Term& t, const RewriteSystem& rs, const Signature& sig);

struct SynthOptions {
  int depth = 2;
  TermSet constants;                 // public names offered as free choices
  std::size_t max_candidates = 400;  // per request; exceeding it truncates
};

struct SynthResult {
  std::vector<Substitution> matches;
  bool truncated = false;
};

// Enumerates substitutions τ for the variables of `pattern` such that
// pattern·τ is deducible. Sub-patterns may be matched against derived
// knowledge at no cost or built with public constructors; each variable that
// must be picked from the pool of atoms costs one unit of `depth`.
SynthResult synth_matches(const KnowledgeBase& kb, const Term& pattern, const RewriteSystem& rs,
                          const Signature& sig, const SynthOptions& opt);

// Deducible ground terms: knowledge, constructor layers over it up to
// `depth`, and instances of the shape hints.
TermSet synth_inputs(const KnowledgeBase& kb, const RewriteSystem& rs, const Signature& sig,
                     const SynthOptions& opt, const std::vector<Term>& shape_hints);

}  // namespace veracct
