#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracct/accountability.hpp"
#include "veracct/model.hpp"
#include "veracct/selfcomp.hpp"
#include "veracct/semantics.hpp"
#include "veracct/validate.hpp"

namespace veracct {

inline constexpr const char* kReportSchema = "veracct-report/1";

// Everything `check` computes for one model at one set of bounds.
struct CheckOutcome {
  std::string model;
  RelationSpec relation;
  ExplorationBounds bounds;
  std::size_t traces = 0;
  std::size_t states = 0;
  bool exhaustive = true;
  std::vector<std::string> warnings;
  std::vector<Diagnostic> diagnostics;
  DirectReport direct;
  ConditionReport conditions;
  std::map<std::size_t, std::string> witness_traces;  // text of traces named by witnesses and mismatches

  bool pass() const { return direct.pass() && conditions.pass(); }
};

CheckOutcome run_check(const Model& m, const ExplorationBounds& b, int jobs);

nlohmann::ordered_json trace_json(const Trace& t, const Model& m, std::size_t id);
// One JSON object per line, in TraceSet order.
std::string traceset_jsonl(const TraceSet& ts, const Model& m);

nlohmann::ordered_json verdict_json(const Verdict& v);
nlohmann::ordered_json bounds_json(const ExplorationBounds& b);
nlohmann::ordered_json check_json(const CheckOutcome& c);
nlohmann::ordered_json selfcomp_json(const SelfcompReport& r, const std::string& model);

std::string check_human(const CheckOutcome& c);
std::string selfcomp_human(const SelfcompReport& r, const std::string& model);

// Serialized with two-space indentation and a trailing newline.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace veracct
