#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "veracct/corpus.hpp"
#include "veracct/parser.hpp"
#include "veracct/report.hpp"

using namespace veracct;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExplorationBounds apply_bounds(ExplorationBounds b, const std::string& spec) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad --bounds item '" + item + "', expected key=N");
    std::string key = item.substr(0, eq);
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad --bounds value in '" + item + "'");
    }
    if (v < 0) throw UsageError("--bounds values must be non-negative");
    if (key == "steps") b.max_steps = v;
    else if (key == "repl") b.repl_unfold = v;
    else if (key == "synth") b.synth_depth = v;
    else throw UsageError("unknown --bounds key '" + key + "'");
  }
  return b;
}

void apply_relation(Model& m, const std::string& spec) {
  if (spec.empty()) return;
  if (spec == "rw") {
    m.relation = RelationSpec{};
  } else if (spec == "rc") {
    m.relation = RelationSpec{RelationSpec::Kind::RC, {}};
  } else if (spec.rfind("custom:", 0) == 0) {
    std::ifstream in(spec.substr(7));
    if (!in) throw UsageError("cannot read lifting matrix " + spec.substr(7));
    RelationSpec r{RelationSpec::Kind::Custom, {}};
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      for (const auto& row : j) {
        std::vector<bool> rv;
        for (const auto& x : row) rv.push_back(x.get<int>() != 0);
        r.lifting.push_back(rv);
      }
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("lifting matrix is not a JSON array of 0/1 rows: ") + e.what());
    }
    if (r.lifting.size() != m.verdict.size())
      throw UsageError("lifting matrix must be square over the " + std::to_string(m.verdict.size()) + " verdict cases");
    for (const auto& row : r.lifting)
      if (row.size() != m.verdict.size())
        throw UsageError("lifting matrix must be square over the " + std::to_string(m.verdict.size()) +
                         " verdict cases");
    m.relation = r;
  } else {
    throw UsageError("--relation must be rw, rc or custom:<file>");
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded accountability checker for protocol models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "human";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string bounds_spec, relation_spec, trace_out;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "human"}));
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--bounds", bounds_spec, "Bound overrides, e.g. steps=6,repl=1,synth=2");
  app.add_option("--relation", relation_spec, "Counterfactual relation: rw, rc or custom:<file>");
  app.add_option("--trace-out", trace_out, "Write the explored traces as JSON lines to this file");

  std::string model_path, corpus_dir = VERACCT_CORPUS_DIR;
  std::size_t trace_id = 0, max_pairs = 2000000;
  bool joint = false;

  auto* explore_cmd = app.add_subcommand("explore", "Explore the model and emit its traces");
  explore_cmd->add_option("model", model_path, "Model file")->required();
  auto* apv_cmd = app.add_subcommand("apv", "A-posteriori verdict of one explored trace");
  apv_cmd->add_option("model", model_path, "Model file")->required();
  apv_cmd->add_option("trace", trace_id, "Trace id")->required();
  auto* verdict_cmd = app.add_subcommand("verdict", "Verdict function applied to one explored trace");
  verdict_cmd->add_option("model", model_path, "Model file")->required();
  verdict_cmd->add_option("trace", trace_id, "Trace id")->required();
  auto* check_cmd = app.add_subcommand("check", "Verification conditions and direct check");
  check_cmd->add_option("model", model_path, "Model file")->required();
  auto* selfcomp_cmd = app.add_subcommand("selfcomp", "Cross-validate the lifting by self-composition");
  selfcomp_cmd->add_option("model", model_path, "Model file")->required();
  selfcomp_cmd->add_flag("--joint", joint, "Also explore both executions jointly");
  selfcomp_cmd->add_option("--max-pairs", max_pairs, "Cap on composed trace pairs");
  auto* corpus_cmd = app.add_subcommand("corpus", "Run the bundled models against their expected outcomes");
  corpus_cmd->add_option("--dir", corpus_dir, "Corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const char* seed_env = std::getenv("VERACCT_SEED");
  std::string seed = seed_env ? seed_env : "";
  bool json = format == "json";

  try {
    if (corpus_cmd->parsed()) {
      auto rs = run_corpus(corpus_dir, jobs);
      if (json) {
        auto j = corpus_json(rs);
        if (!seed.empty()) j["seed"] = seed;
        std::cout << dump(j);
      } else {
        if (!seed.empty()) std::cout << "seed " << seed << "\n";
        std::cout << corpus_human(rs);
      }
      bool all = std::all_of(rs.begin(), rs.end(), [](const CorpusResult& r) { return r.match; });
      return all ? 0 : 1;
    }

    Model m = load_model(model_path);
    apply_relation(m, relation_spec);
    ExplorationBounds b = apply_bounds(m.bounds, bounds_spec);

    if (check_cmd->parsed()) {
      CheckOutcome c = run_check(m, b, jobs);
      if (!trace_out.empty()) write_file(trace_out, traceset_jsonl(explore(m, b, jobs), m));
      if (json) {
        auto j = check_json(c);
        if (!seed.empty()) j["seed"] = seed;
        std::cout << dump(j);
      } else {
        if (!seed.empty()) std::cout << "seed " << seed << "\n";
        std::cout << check_human(c);
      }
      return c.pass() ? 0 : 1;
    }

    TraceSet ts = explore(m, b, jobs);
    if (!trace_out.empty()) write_file(trace_out, traceset_jsonl(ts, m));
    for (const auto& w : ts.warnings) std::cerr << "warning: " << w << "\n";

    if (explore_cmd->parsed()) {
      if (json) {
        if (trace_out.empty()) std::cout << traceset_jsonl(ts, m);
      } else {
        if (!seed.empty()) std::cout << "seed " << seed << "\n";
        std::cout << ts.traces.size() << " traces" << (ts.exhaustive ? "" : " (not exhaustive)") << "\n";
        for (std::size_t i = 0; i < ts.traces.size(); ++i) std::cout << i << ": " << ts.traces[i].key() << "\n";
      }
      return 0;
    }

    if (apv_cmd->parsed() || verdict_cmd->parsed()) {
      if (trace_id >= ts.traces.size())
        throw UsageError("trace id " + std::to_string(trace_id) + " out of range (" +
                         std::to_string(ts.traces.size()) + " traces)");
      Universe u = build_universe(m, ts.traces, jobs);
      ordered_json j;
      j["schema"] = kReportSchema;
      j["model"] = m.name;
      j["relation"] = m.relation.str();
      if (!seed.empty()) j["seed"] = seed;
      j["trace"] = trace_json(ts.traces[trace_id], m, trace_id);
      j["phi"] = u.traces[trace_id].phi;
      int code = 0;
      std::string text;
      if (apv_cmd->parsed()) {
        Verdict v = apv(u, trace_id);
        j["apv"] = verdict_json(v);
        text = "apv " + verdict_str(v);
      } else {
        try {
          Verdict v = verdict_of(u, trace_id);
          j["verdict"] = verdict_json(v);
          text = "verdict " + verdict_str(v);
        } catch (const VerdictError& e) {
          j["error"] = e.what();
          text = std::string("error: ") + e.what();
          code = 1;
        }
      }
      if (json) {
        std::cout << dump(j);
      } else {
        if (!seed.empty()) std::cout << "seed " << seed << "\n";
        std::cout << "trace " << trace_id << ": " << ts.traces[trace_id].key() << "\n";
        std::cout << "property " << (u.traces[trace_id].phi ? "holds" : "violated") << "\n" << text << "\n";
      }
      return code;
    }

    if (selfcomp_cmd->parsed()) {
      Universe u = build_universe(m, ts.traces, jobs);
      SelfcompReport r = run_selfcomp(m, ts, u, joint, max_pairs, jobs);
      if (json) {
        auto j = selfcomp_json(r, m.name);
        if (!seed.empty()) j["seed"] = seed;
        std::cout << dump(j);
      } else {
        if (!seed.empty()) std::cout << "seed " << seed << "\n";
        std::cout << selfcomp_human(r, m.name);
      }
      return r.pass() ? 0 : 1;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
