#include "veracct/model.hpp"

#include <algorithm>

namespace veracct {

std::string verdict_str(const Verdict& v) {
  std::string s = "{";
  bool first_set = true;
  for (const auto& ps : v) {
    if (!first_set) s += ",";
    first_set = false;
    s += "{";
    bool first = true;
    for (const auto& p : ps) {
      if (!first) s += ",";
      first = false;
      s += p;
    }
    s += "}";
  }
  return s + "}";
}

std::string RelationSpec::str() const {
  switch (kind) {
    case Kind::RW: return "rw";
    case Kind::RC: return "rc";
    case Kind::Custom: {
      std::string s = "custom([";
      for (std::size_t i = 0; i < lifting.size(); ++i) {
        s += i ? ",[" : "[";
        for (std::size_t j = 0; j < lifting[i].size(); ++j) s += std::string(j ? "," : "") + (lifting[i][j] ? "1" : "0");
        s += "]";
      }
      return s + "])";
    }
  }
  return "rw";
}

std::size_t Model::party_index(const std::string& p) const {
  auto it = std::find(parties.begin(), parties.end(), p);
  return it == parties.end() ? parties.size() : static_cast<std::size_t>(it - parties.begin());
}

namespace {

bool eval_qf(const FormulaPtr& f, const RewriteSystem& rs) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::EqTerm: return equal_mod_E(f->lhs, f->rhs, rs);
    case Formula::Kind::Not: return !eval_qf(f->a, rs);
    case Formula::Kind::And: return eval_qf(f->a, rs) && eval_qf(f->b, rs);
    case Formula::Kind::Or: return eval_qf(f->a, rs) || eval_qf(f->b, rs);
    case Formula::Kind::Implies: return !eval_qf(f->a, rs) || eval_qf(f->b, rs);
    default:
      throw ModelError("predicate bodies may only use term equalities and connectives");
  }
}

}  // namespace

bool eval_predicate(const Model& m, const Condition& c) {
  auto it = m.predicates.find(c.predicate);
  if (it == m.predicates.end()) throw ModelError("unknown predicate '" + c.predicate + "'");
  const Predicate& p = it->second;
  if (p.params.size() != c.args.size()) throw ModelError("predicate '" + c.predicate + "' arity mismatch");
  Substitution s;
  for (std::size_t i = 0; i < p.params.size(); ++i) s[p.params[i]] = c.args[i];
  return eval_qf(substitute(p.body, s), m.rs);
}

}  // namespace veracct
