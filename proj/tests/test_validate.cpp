#include <algorithm>

#include "doctest.h"
#include "support.hpp"
#include "veracct/parser.hpp"
#include "veracct/validate.hpp"

using namespace veracct;
using namespace veracct::testing;

namespace {

std::vector<std::string> kinds(const std::vector<Diagnostic>& ds, Diagnostic::Severity sev) {
  std::vector<std::string> out;
  for (const auto& d : ds)
    if (d.severity == sev) out.push_back(d.kind);
  return out;
}

Model judge_model(const std::string& judge, const std::string& extra = "") {
  return parse_model(R"(
functions: sk/1 [private]
parties: A, J
trusted: J
process A = in(<'corrupt', 'A'>); event Corrupted('A'); out(sk('A'))
process J = )" + judge + "\n" + extra + R"(
main = A | J
property: All #i. Never()@i ==> Never()@i
verdict:
  case otherwise -> {}
relation: rc
)");
}

}  // namespace

TEST_CASE("validate: corpus models satisfy the discipline") {
  for (const char* name : {"whodunit_faulty", "whodunit_fixed", "monitor_fixed", "accountable_algorithms",
                           "two_doctors"}) {
    auto ds = validate_model(corpus_model(name));
    CHECK_MESSAGE(!has_errors(ds), name);
  }
}

TEST_CASE("validate: every trusted path under rc emits exactly one control event") {
  auto ok = validate_model(judge_model(
      "in(x); if x = 'a' then (event Control('1'); event Done()) else event Control('2')"));
  CHECK(kinds(ok, Diagnostic::Severity::Error).empty());

  auto missing = validate_model(judge_model("in(x); if x = 'a' then event Control('1') else event Done()"));
  CHECK(kinds(missing, Diagnostic::Severity::Error) == std::vector<std::string>{"ControlDiscipline"});

  auto twice = validate_model(judge_model("event Control('1'); event Control('2')"));
  CHECK(kinds(twice, Diagnostic::Severity::Error) == std::vector<std::string>{"ControlDiscipline"});

  auto aborted = validate_model(judge_model("in(x); if x = 'a' then event Control('1')"));
  CHECK(kinds(aborted, Diagnostic::Severity::Error).empty());
}

TEST_CASE("validate: corruption processes") {
  auto missing = validate_model(parse_model(R"(
parties: A, B
main = event Hello()
property: All #i. Never()@i ==> Never()@i
verdict:
  case otherwise -> {}
)"));
  auto errs = kinds(missing, Diagnostic::Severity::Error);
  CHECK(std::count(errs.begin(), errs.end(), "MissingCorruptionEvent") == 2);

  auto trusted = validate_model(parse_model(R"(
parties: A
trusted: A
main = in(<'corrupt', 'A'>); event Corrupted('A')
property: All #i. Never()@i ==> Never()@i
verdict:
  case otherwise -> {}
)"));
  CHECK(kinds(trusted, Diagnostic::Severity::Error) == std::vector<std::string>{"TrustedCorruptible"});

  auto silent = validate_model(parse_model(R"(
functions: sk/1 [private], sign/2
parties: A
main = out(sign('m', sk('A'))) | (in(<'corrupt', 'A'>); event Corrupted('A'))
property: All #i. Never()@i ==> Never()@i
verdict:
  case otherwise -> {}
)"));
  CHECK(kinds(silent, Diagnostic::Severity::Warning) == std::vector<std::string>{"SecretsNotOutput"});
  CHECK_FALSE(has_errors(silent));
}
