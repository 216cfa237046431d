#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "veracct/term.hpp"

namespace veracct {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { False, True, Action, Less, EqTime, EqTerm, Not, And, Or, Implies, Exists, Forall };

  Kind kind = Kind::False;
  std::string fact;            // Action
  std::vector<Term> args;      // Action arguments
  Term lhs, rhs;               // Action: lhs is the timepoint; Less/EqTime/EqTerm operands
  FormulaPtr a, b;             // Not uses a
  std::vector<Term> vars;      // quantified variables (Var terms carrying their sort)

  std::string str() const;
};

namespace fm {
FormulaPtr falsum();
FormulaPtr verum();
FormulaPtr action(const std::string& fact, std::vector<Term> args, const Term& time);
FormulaPtr less(const Term& i, const Term& j);
FormulaPtr eq_time(const Term& i, const Term& j);
FormulaPtr eq_term(const Term& s, const Term& t);
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr f, FormulaPtr g);
FormulaPtr disj(FormulaPtr f, FormulaPtr g);
FormulaPtr implies(FormulaPtr f, FormulaPtr g);
FormulaPtr exists(std::vector<Term> vars, FormulaPtr body);
FormulaPtr forall(std::vector<Term> vars, FormulaPtr body);
FormulaPtr conj_all(const std::vector<FormulaPtr>& fs);  // empty -> true
FormulaPtr disj_all(const std::vector<FormulaPtr>& fs);  // empty -> false
Term tvar(const std::string& name);
}  // namespace fm

// Free variables with their sorts, in order of first occurrence.
std::vector<Term> free_vars(const FormulaPtr& f);

// Substitutes free occurrences; bound variables shadow.
FormulaPtr substitute(const FormulaPtr& f, const Substitution& s);

// Fact symbols used in action atoms, with arities.
void collect_facts(const FormulaPtr& f, std::vector<std::pair<std::string, std::size_t>>& out);

}  // namespace veracct
