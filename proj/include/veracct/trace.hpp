#pragma once

#include <set>
#include <string>
#include <vector>

#include "veracct/term.hpp"

namespace veracct {

struct Fact {
  std::string name;
  std::vector<Term> args;

  std::string str() const;
  friend bool operator==(const Fact& a, const Fact& b) { return a.name == b.name && a.args == b.args; }
  friend bool operator<(const Fact& a, const Fact& b);
};

struct TraceStep {
  std::vector<Fact> facts;  // kept sorted
  std::string by;           // emitting party, empty if none
  std::string eid;          // execution id in composed traces, empty otherwise
};

struct Trace {
  std::vector<TraceStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  // Renames fresh names to base.k in order of first appearance.
  Trace canonical() const;
  std::string key() const;  // compact text form, used for ordering and dedup
};

std::set<std::string> corrupted(const Trace& t, const std::string& event_name,
                                const std::vector<std::string>& parties);

}  // namespace veracct
