#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "veracct/report.hpp"

namespace veracct {

struct CorpusEntry {
  std::string name;
  std::string file;  // relative to the corpus directory
  std::string relation;
  bool expect_pass = true;
  std::vector<std::string> failing;  // expected failed condition names, when known
};

// Reads expected.json from the corpus directory.
std::vector<CorpusEntry> load_corpus(const std::string& dir);

Model load_model(const std::string& path);

struct CorpusResult {
  CorpusEntry entry;
  CheckOutcome outcome;
  bool agree = true;  // conditions pass iff direct check passes
  bool match = true;  // outcome, failed conditions and agreement as expected
  std::string why;    // reason for a mismatch
};

std::vector<CorpusResult> run_corpus(const std::string& dir, int jobs);

nlohmann::ordered_json corpus_json(const std::vector<CorpusResult>& rs);
std::string corpus_human(const std::vector<CorpusResult>& rs);

}  // namespace veracct
