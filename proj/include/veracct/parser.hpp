#pragma once

#include <string>

#include "veracct/model.hpp"

namespace veracct {

// Throws ModelError with line/column for syntax errors, unbound variables,
// unknown symbols and arity mismatches.
Model parse_model(const std::string& text, const std::string& name = "model");

// Formula over the model's signature; free identifiers must be declared
// nullary functions.
FormulaPtr parse_formula(const std::string& text, const Model& m);

// Term over the model's signature; unknown identifiers become variables.
Term parse_term(const std::string& text, const Model& m);

// A process fragment in the context of the model (no free variables allowed).
ProcPtr parse_process(const std::string& text, Model& m);

}  // namespace veracct
