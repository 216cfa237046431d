#include "veracct/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "veracct/parser.hpp"

namespace veracct {

using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Model load_model(const std::string& path) {
  return parse_model(read_file(path), std::filesystem::path(path).stem().string());
}

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  auto path = (std::filesystem::path(dir) / "expected.json").string();
  auto j = nlohmann::json::parse(read_file(path));
  std::vector<CorpusEntry> out;
  for (const auto& m : j.at("models")) {
    CorpusEntry e;
    e.name = m.at("name").get<std::string>();
    e.file = m.at("file").get<std::string>();
    e.relation = m.value("relation", "");
    e.expect_pass = m.at("expected").get<std::string>() == "pass";
    if (m.contains("failing")) e.failing = m.at("failing").get<std::vector<std::string>>();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CorpusResult> run_corpus(const std::string& dir, int jobs) {
  std::vector<CorpusResult> out;
  for (const auto& e : load_corpus(dir)) {
    CorpusResult r;
    r.entry = e;
    Model m = load_model((std::filesystem::path(dir) / e.file).string());
    r.outcome = run_check(m, m.bounds, jobs);
    bool cond = r.outcome.conditions.pass();
    r.agree = cond == r.outcome.direct.pass();
    auto failed = r.outcome.conditions.failed_conditions();
    auto want = e.failing;
    std::sort(failed.begin(), failed.end());
    std::sort(want.begin(), want.end());
    if (cond != e.expect_pass) {
      r.match = false;
      r.why = std::string("conditions ") + (cond ? "pass" : "fail") + ", expected " + (e.expect_pass ? "pass" : "fail");
    } else if (!e.expect_pass && !want.empty() && failed != want) {
      r.match = false;
      r.why = "failed conditions differ from the expected ones";
    } else if (!r.agree) {
      r.match = false;
      r.why = "conditions and direct check disagree";
    }
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json corpus_json(const std::vector<CorpusResult>& rs) {
  ordered_json j;
  j["schema"] = kReportSchema;
  bool all = std::all_of(rs.begin(), rs.end(), [](const CorpusResult& r) { return r.match; });
  j["result"] = all ? "expected" : "unexpected";
  ordered_json ms = ordered_json::array();
  for (const auto& r : rs) {
    ordered_json mj;
    mj["name"] = r.entry.name;
    mj["expected"] = r.entry.expect_pass ? "pass" : "fail";
    mj["expected_failing"] = r.entry.failing;
    mj["conditions"] = r.outcome.conditions.pass() ? "pass" : "fail";
    mj["direct"] = r.outcome.direct.pass() ? "pass" : "fail";
    mj["failed"] = r.outcome.conditions.failed_conditions();
    mj["match"] = r.match;
    if (!r.why.empty()) mj["why"] = r.why;
    mj["report"] = check_json(r.outcome);
    ms.push_back(mj);
  }
  j["models"] = ms;
  return j;
}

std::string corpus_human(const std::vector<CorpusResult>& rs) {
  std::ostringstream o;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  o << pad("model", 26) << pad("relation", 10) << pad("traces", 8) << pad("expected", 10) << pad("conditions", 12)
    << pad("direct", 8) << "match\n";
  for (const auto& r : rs) {
    std::string rel = r.outcome.relation.kind == RelationSpec::Kind::Custom ? "custom" : r.outcome.relation.str();
    std::string cond = r.outcome.conditions.pass() ? "pass" : "fail";
    auto failed = r.outcome.conditions.failed_conditions();
    if (!failed.empty()) {
      cond += " (";
      for (std::size_t i = 0; i < failed.size(); ++i) cond += (i ? "," : "") + failed[i];
      cond += ")";
    }
    o << pad(r.entry.name, 26) << pad(rel, 10) << pad(std::to_string(r.outcome.traces), 8)
      << pad(r.entry.expect_pass ? "pass" : "fail", 10) << pad(cond, 12) << pad(r.outcome.direct.pass() ? "pass" : "fail", 8)
      << (r.match ? "yes" : "NO: " + r.why) << "\n";
  }
  return o.str();
}

}  // namespace veracct
