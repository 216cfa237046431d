#include "veracct/report.hpp"

#include <cstdio>
#include <sstream>

namespace veracct {

using nlohmann::ordered_json;

CheckOutcome run_check(const Model& m, const ExplorationBounds& b, int jobs) {
  CheckOutcome c;
  c.model = m.name;
  c.relation = m.relation;
  c.bounds = b;
  c.diagnostics = validate_model(m);
  TraceSet ts = explore(m, b, jobs);
  c.traces = ts.traces.size();
  c.states = ts.states;
  c.exhaustive = ts.exhaustive;
  c.warnings = ts.warnings;
  Universe u = build_universe(m, ts.traces, jobs);
  c.direct = check_direct(u);
  c.conditions = check_conditions(u);
  c.warnings.insert(c.warnings.end(), c.conditions.warnings.begin(), c.conditions.warnings.end());
  auto note = [&](std::size_t id) {
    if (id < ts.traces.size()) c.witness_traces.emplace(id, ts.traces[id].key());
  };
  for (const auto& mm : c.direct.mismatches) note(mm.trace);
  for (const auto& e : c.conditions.entries)
    for (const auto& w : e.witnesses)
      for (auto id : w.traces) note(id);
  return c;
}

ordered_json trace_json(const Trace& t, const Model& m, std::size_t id) {
  ordered_json j;
  j["id"] = id;
  ordered_json steps = ordered_json::array();
  for (const auto& st : t.steps) {
    ordered_json s;
    ordered_json facts = ordered_json::array();
    for (const auto& f : st.facts) facts.push_back(f.str());
    s["facts"] = facts;
    s["by"] = st.by.empty() ? ordered_json(nullptr) : ordered_json(st.by);
    if (!st.eid.empty()) s["eid"] = st.eid;
    steps.push_back(s);
  }
  j["steps"] = steps;
  ordered_json cor = ordered_json::array();
  for (const auto& p : corrupted(t, m.options.corruption_event, m.parties)) cor.push_back(p);
  j["corrupted"] = cor;
  return j;
}

std::string traceset_jsonl(const TraceSet& ts, const Model& m) {
  std::string out;
  for (std::size_t i = 0; i < ts.traces.size(); ++i) {
    out += trace_json(ts.traces[i], m, i).dump();
    out += '\n';
  }
  return out;
}

ordered_json verdict_json(const Verdict& v) {
  ordered_json j = ordered_json::array();
  for (const auto& s : v) {
    ordered_json set = ordered_json::array();
    for (const auto& p : s) set.push_back(p);
    j.push_back(set);
  }
  return j;
}

ordered_json bounds_json(const ExplorationBounds& b) {
  ordered_json j;
  j["steps"] = b.max_steps;
  j["repl"] = b.repl_unfold;
  j["synth"] = b.synth_depth;
  j["max_traces"] = b.max_traces;
  return j;
}

namespace {

ordered_json entry_json(const ConditionEntry& e) {
  ordered_json j;
  j["condition"] = e.name;
  j["cases"] = e.cases;
  j["status"] = e.status;
  ordered_json ws = ordered_json::array();
  for (const auto& w : e.witnesses) {
    ordered_json wj;
    wj["traces"] = w.traces;
    wj["detail"] = w.detail;
    ws.push_back(wj);
  }
  j["witnesses"] = ws;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

ordered_json matrix_json(const std::vector<std::vector<bool>>& r) {
  ordered_json j = ordered_json::array();
  for (const auto& row : r) {
    ordered_json rj = ordered_json::array();
    for (bool b : row) rj.push_back(b ? 1 : 0);
    j.push_back(rj);
  }
  return j;
}

const char* severity_str(Diagnostic::Severity s) { return s == Diagnostic::Severity::Error ? "error" : "warning"; }

std::string cases_str(const std::vector<std::size_t>& cs) {
  if (cs.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "," : "") + std::to_string(cs[i]);
  return s;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

ordered_json check_json(const CheckOutcome& c) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["model"] = c.model;
  j["relation"] = c.relation.str();
  j["bounds"] = bounds_json(c.bounds);
  j["traces"] = c.traces;
  j["exhaustive"] = c.exhaustive;
  j["result"] = c.pass() ? "pass" : "fail";
  ordered_json diags = ordered_json::array();
  for (const auto& d : c.diagnostics)
    diags.push_back(ordered_json{{"severity", severity_str(d.severity)}, {"kind", d.kind}, {"message", d.message}});
  j["diagnostics"] = diags;
  j["warnings"] = c.warnings;

  ordered_json cond;
  cond["table"] = c.conditions.table;
  cond["result"] = c.conditions.pass() ? "pass" : "fail";
  cond["failed"] = c.conditions.failed_conditions();
  if (!c.conditions.lifting.empty()) cond["lifting"] = matrix_json(c.conditions.lifting);
  ordered_json entries = ordered_json::array();
  for (const auto& e : c.conditions.entries) entries.push_back(entry_json(e));
  cond["entries"] = entries;
  j["conditions"] = cond;

  ordered_json direct;
  direct["result"] = c.direct.pass() ? "pass" : "fail";
  ordered_json mm = ordered_json::array();
  for (const auto& m : c.direct.mismatches)
    mm.push_back(ordered_json{{"trace", m.trace}, {"verdict", m.verdict}, {"apv", m.apv}});
  direct["mismatches"] = mm;
  j["direct"] = direct;

  ordered_json wt = ordered_json::array();
  for (const auto& [id, text] : c.witness_traces) wt.push_back(ordered_json{{"id", id}, {"trace", text}});
  j["witness_traces"] = wt;
  return j;
}

ordered_json selfcomp_json(const SelfcompReport& r, const std::string& model) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["model"] = model;
  j["result"] = r.pass() ? "pass" : "fail";
  j["composed"] = r.composed;
  j["joint_composed"] = r.joint_composed;
  j["alpha_seq"] = r.alpha_ok;
  ordered_json es = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json ej;
    ej["cases"] = {e.i, e.j};
    ej["status"] = e.status;
    ej["selfcomp"] = e.selfcomp;
    ej["derived"] = e.derived;
    ej["joint"] = e.joint ? ordered_json(*e.joint) : ordered_json(nullptr);
    ej["witness"] = e.witness ? ordered_json(*e.witness) : ordered_json(nullptr);
    es.push_back(ej);
  }
  j["entries"] = es;
  j["warnings"] = r.warnings;
  return j;
}

std::string check_human(const CheckOutcome& c) {
  std::ostringstream o;
  o << "model " << c.model << "  relation " << c.relation.str() << "  bounds steps=" << c.bounds.max_steps
    << " repl=" << c.bounds.repl_unfold << " synth=" << c.bounds.synth_depth << "\n";
  o << c.traces << " traces" << (c.exhaustive ? "" : " (not exhaustive)") << "\n";
  for (const auto& d : c.diagnostics) o << severity_str(d.severity) << ": " << d.kind << ": " << d.message << "\n";
  for (const auto& w : c.warnings) o << "warning: " << w << "\n";
  o << "\n" << pad("condition", 10) << pad("cases", 8) << pad("status", 9) << "witness\n";
  for (const auto& e : c.conditions.entries) {
    std::string wit = e.note;
    if (!e.witnesses.empty()) {
      const auto& w = e.witnesses.front();
      wit = w.detail;
      if (!w.traces.empty()) {
        wit += " (trace";
        for (auto id : w.traces) wit += " " + std::to_string(id);
        wit += ")";
      }
      if (e.witnesses.size() > 1) wit += " +" + std::to_string(e.witnesses.size() - 1) + " more";
    }
    o << pad(e.name, 10) << pad(cases_str(e.cases), 8) << pad(e.status, 9) << wit << "\n";
  }
  if (!c.conditions.lifting.empty()) {
    o << "\nlifting R\n";
    for (const auto& row : c.conditions.lifting) {
      o << " ";
      for (bool b : row) o << " " << (b ? 1 : 0);
      o << "\n";
    }
  }
  o << "\nconditions: " << (c.conditions.pass() ? "pass" : "FAIL");
  auto failed = c.conditions.failed_conditions();
  for (std::size_t i = 0; i < failed.size(); ++i) o << (i ? ", " : " (") << failed[i];
  if (!failed.empty()) o << ")";
  o << "\ndirect check (verdict = apv on every trace): " << (c.direct.pass() ? "pass" : "FAIL") << "\n";
  std::size_t shown = 0;
  for (const auto& m : c.direct.mismatches) {
    if (shown++ == 5) {
      o << "  ... " << c.direct.mismatches.size() - 5 << " more\n";
      break;
    }
    o << "  trace " << m.trace << ": verdict " << m.verdict << ", apv " << m.apv << "\n";
  }
  if (!c.witness_traces.empty()) {
    o << "\nwitness traces\n";
    for (const auto& [id, text] : c.witness_traces) o << "  " << id << ": " << text << "\n";
  }
  o << "\nresult: " << (c.pass() ? "pass" : "FAIL") << "\n";
  return o.str();
}

std::string selfcomp_human(const SelfcompReport& r, const std::string& model) {
  std::ostringstream o;
  o << "model " << model << "  composed traces " << r.composed;
  if (r.joint_composed) o << "  joint " << r.joint_composed;
  o << "\nalpha_seq on composed traces: " << (r.alpha_ok ? "holds" : "VIOLATED") << "\n";
  for (const auto& w : r.warnings) o << "warning: " << w << "\n";
  o << "\n" << pad("cases", 8) << pad("selfcomp", 10) << pad("derived", 9) << pad("joint", 7) << "status\n";
  for (const auto& e : r.entries) {
    std::string joint = e.joint ? (*e.joint ? "1" : "0") : "-";
    o << pad(std::to_string(e.i) + "," + std::to_string(e.j), 8) << pad(e.selfcomp ? "1" : "0", 10)
      << pad(e.derived ? "1" : "0", 9) << pad(joint, 7) << e.status;
    if (e.witness) o << " (composed trace " << *e.witness << ")";
    o << "\n";
  }
  o << "\nresult: " << (r.pass() ? "pass" : "FAIL") << "\n";
  return o.str();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace veracct
