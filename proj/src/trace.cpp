#include "veracct/trace.hpp"

#include <algorithm>
#include <map>

namespace veracct {

std::string Fact::str() const {
  std::string s = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i].str();
  }
  return s + ")";
}

bool operator<(const Fact& a, const Fact& b) {
  if (a.name != b.name) return a.name < b.name;
  return a.args < b.args;
}

namespace {

std::string base_of(const std::string& name) {
  auto dot = name.rfind('.');
  if (dot == std::string::npos || dot + 1 == name.size()) return name;
  for (std::size_t i = dot + 1; i < name.size(); ++i)
    if (name[i] < '0' || name[i] > '9') return name;
  return name.substr(0, dot);
}

void scan_names(const Term& t, std::vector<std::string>& order, std::set<std::string>& seen) {
  if (t.kind() == Term::Kind::FreshName) {
    if (seen.insert(t.name()).second) order.push_back(t.name());
    return;
  }
  for (const auto& a : t.args()) scan_names(a, order, seen);
}

}  // namespace

Trace Trace::canonical() const {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& st : steps)
    for (const auto& f : st.facts)
      for (const auto& a : f.args) scan_names(a, order, seen);
  std::map<std::string, std::string> renaming;
  std::map<std::string, int> counters;
  for (const auto& n : order) {
    std::string b = base_of(n);
    renaming[n] = b + "." + std::to_string(++counters[b]);
  }
  Trace out;
  out.steps.reserve(steps.size());
  for (const auto& st : steps) {
    TraceStep ns{{}, st.by, st.eid};
    for (const auto& f : st.facts) {
      Fact nf{f.name, {}};
      for (const auto& a : f.args) nf.args.push_back(rename_fresh(a, renaming));
      ns.facts.push_back(std::move(nf));
    }
    std::sort(ns.facts.begin(), ns.facts.end());
    out.steps.push_back(std::move(ns));
  }
  return out;
}

std::string Trace::key() const {
  std::string k;
  for (const auto& st : steps) {
    k += '[';
    for (std::size_t i = 0; i < st.facts.size(); ++i) {
      if (i) k += ',';
      k += st.facts[i].str();
    }
    k += '|';
    k += st.by;
    if (!st.eid.empty()) k += '#' + st.eid;
    k += ']';
  }
  return k;
}

std::set<std::string> corrupted(const Trace& t, const std::string& event_name,
                                const std::vector<std::string>& parties) {
  std::set<std::string> out;
  for (const auto& st : t.steps)
    for (const auto& f : st.facts) {
      if (f.name != event_name || f.args.size() != 1) continue;
      const Term& a = f.args[0];
      if (a.kind() != Term::Kind::PubName) continue;
      for (const auto& p : parties)
        if (p == a.name()) out.insert(p);
    }
  return out;
}

}  // namespace veracct
