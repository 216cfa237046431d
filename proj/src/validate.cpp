#include "veracct/validate.hpp"

#include <algorithm>
#include <functional>

namespace veracct {

namespace {

struct CorruptionSite {
  Term party;      // the event argument, a constant or a variable
  ProcPtr after;   // continuation after the event
};

void find_corruption(const ProcPtr& p, const std::string& event, std::vector<CorruptionSite>& out) {
  if (!p) return;
  if (p->kind == Process::Kind::Event && p->fact == event && p->fact_args.size() == 1)
    out.push_back({p->fact_args[0], p->p});
  find_corruption(p->p, event, out);
  find_corruption(p->q, event, out);
}

void collect_outputs(const ProcPtr& p, std::vector<Term>& out) {
  if (!p) return;
  if (p->kind == Process::Kind::Out) out.push_back(p->t2);
  collect_outputs(p->p, out);
  collect_outputs(p->q, out);
}

void private_images(const Term& t, const Model& m, const Term& party, TermSet& out) {
  if (t.kind() != Term::Kind::App) return;
  if (m.sig.is_private(t.name()) && t.ground()) {
    bool mentions = false;
    std::function<void(const Term&)> scan = [&](const Term& s) {
      if (s == party) mentions = true;
      for (const auto& a : s.args()) scan(a);
    };
    scan(t);
    if (mentions) out.insert(t);
  }
  for (const auto& a : t.args()) private_images(a, m, party, out);
}

void collect_terms(const ProcPtr& p, std::vector<Term>& out) {
  if (!p) return;
  out.push_back(p->t1);
  out.push_back(p->t2);
  for (const auto& a : p->cond.args) out.push_back(a);
  for (const auto& a : p->fact_args) out.push_back(a);
  collect_terms(p->p, out);
  collect_terms(p->q, out);
}

bool occurs(const Term& needle, const Term& hay) {
  if (needle == hay) return true;
  for (const auto& a : hay.args())
    if (occurs(needle, a)) return true;
  return false;
}

// Number of control events on each root-to-leaf path, with a readable path label.
// An omitted else branch that has emitted nothing yet is an abort, not a path.
void control_paths(const ProcPtr& p, const std::string& event, int count, std::string path,
                   std::vector<std::pair<std::string, int>>& out) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Nil:
      if (p->implicit && count == 0) return;
      out.emplace_back(path.empty() ? "(root)" : path, count);
      return;
    case K::Event:
      control_paths(p->p, event, count + (p->fact == event ? 1 : 0), path, out);
      return;
    case K::Cond:
      control_paths(p->p, event, count, path + "/then", out);
      control_paths(p->q, event, count, path + "/else", out);
      return;
    case K::Lookup:
      control_paths(p->p, event, count, path + "/found", out);
      control_paths(p->q, event, count, path + "/missing", out);
      return;
    case K::Choice:
      control_paths(p->p, event, count, path + "/left", out);
      control_paths(p->q, event, count, path + "/right", out);
      return;
    case K::Par: {
      std::vector<std::pair<std::string, int>> left, right;
      control_paths(p->p, event, 0, "", left);
      control_paths(p->q, event, 0, "", right);
      for (const auto& [lp, lc] : left)
        for (const auto& [rp, rc] : right) out.emplace_back(path + "/(" + lp + " | " + rp + ")", count + lc + rc);
      return;
    }
    default:
      control_paths(p->p, event, count, path, out);
      return;
  }
}

}  // namespace

bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

std::vector<Diagnostic> validate_model(const Model& m) {
  std::vector<Diagnostic> ds;
  std::vector<CorruptionSite> sites;
  find_corruption(m.main, m.options.corruption_event, sites);
  bool generic = std::any_of(sites.begin(), sites.end(), [](const CorruptionSite& s) { return !s.party.ground(); });
  std::vector<Term> all_terms;
  collect_terms(m.main, all_terms);

  for (const auto& party : m.parties) {
    Term pt = Term::pub(party);
    std::vector<const CorruptionSite*> mine;
    for (const auto& s : sites)
      if (s.party == pt) mine.push_back(&s);
    if (m.trusted.count(party)) {
      if (!mine.empty())
        ds.push_back({Diagnostic::Severity::Error, "TrustedCorruptible",
                      "trusted party " + party + " has a corruption process"});
      continue;
    }
    if (mine.empty() && !generic) {
      ds.push_back({Diagnostic::Severity::Error, "MissingCorruptionEvent",
                    "untrusted party " + party + " never emits " + m.options.corruption_event + "('" + party + "')"});
      continue;
    }
    TermSet secrets;
    for (const auto& t : all_terms) private_images(t, m, pt, secrets);
    std::vector<Term> leaked;
    for (const auto& s : sites)
      if (s.party == pt || !s.party.ground()) {
        Substitution sub;
        if (!s.party.ground()) sub[s.party.name()] = pt;
        std::vector<Term> outs;
        collect_outputs(s.after, outs);
        for (auto& o : outs) leaked.push_back(substitute(o, sub));
      }
    for (const auto& sec : secrets) {
      bool out = std::any_of(leaked.begin(), leaked.end(), [&](const Term& o) { return occurs(sec, o); });
      if (!out)
        ds.push_back({Diagnostic::Severity::Warning, "SecretsNotOutput",
                      "corruption of " + party + " does not output " + sec.str()});
    }
  }

  if (m.relation.kind == RelationSpec::Kind::RC) {
    for (const auto& party : m.parties) {
      if (!m.trusted.count(party)) continue;
      auto it = m.roles.find(party);
      if (it == m.roles.end()) continue;
      std::vector<std::pair<std::string, int>> paths;
      control_paths(it->second, m.options.control_event, 0, "", paths);
      for (const auto& [path, n] : paths)
        if (n != 1)
          ds.push_back({Diagnostic::Severity::Error, "ControlDiscipline",
                        "role " + party + " path " + path + " emits " + std::to_string(n) + " " +
                            m.options.control_event + " events"});
    }
  }
  return ds;
}

}  // namespace veracct
