#pragma once

#include <string>
#include <vector>

#include "veracct/model.hpp"

namespace veracct {

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::string kind;  // MissingCorruptionEvent, TrustedCorruptible, SecretsNotOutput, ControlDiscipline
  std::string message;
};

// Checks the corruption discipline of untrusted parties and, under RC, that
// every root-to-leaf path of a trusted role emits exactly one control event.
std::vector<Diagnostic> validate_model(const Model& m);

bool has_errors(const std::vector<Diagnostic>& ds);

}  // namespace veracct
