#include "veracct/term.hpp"

#include <functional>
#include <sstream>

namespace veracct {

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Pub: return "pub";
    case Sort::Fresh: return "fresh";
    case Sort::Msg: return "msg";
    case Sort::Temp: return "temp";
  }
  return "?";
}

bool sort_leq(Sort lower, Sort upper) {
  if (lower == upper) return true;
  if (upper == Sort::Msg) return lower == Sort::Pub || lower == Sort::Fresh;
  return false;
}

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

Term Term::make(Kind k, Sort s, std::string name, std::vector<Term> args) {
  std::size_t h = mix(std::hash<std::string>{}(name), static_cast<std::size_t>(k));
  std::size_t size = 1;
  bool ground = k != Kind::Var;
  for (const auto& a : args) {
    h = mix(h, a.hash());
    size += a.size();
    ground = ground && a.ground();
  }
  return Term(std::make_shared<const Node>(k, s, std::move(name), std::move(args), h, size, ground));
}

Term::Term() : Term(make(Kind::PubName, Sort::Pub, "", {})) {}

Term Term::pub(const std::string& name) { return make(Kind::PubName, Sort::Pub, name, {}); }
Term Term::fresh(const std::string& name) { return make(Kind::FreshName, Sort::Fresh, name, {}); }
Term Term::var(const std::string& name, Sort sort) { return make(Kind::Var, sort, name, {}); }
Term Term::app(const std::string& symbol, std::vector<Term> args) {
  return make(Kind::App, Sort::Msg, symbol, std::move(args));
}
Term Term::pair(const Term& a, const Term& b) { return app("pair", {a, b}); }

Term Term::tuple(const std::vector<Term>& items) {
  if (items.empty()) throw std::invalid_argument("empty tuple");
  Term acc = items.back();
  for (std::size_t i = items.size() - 1; i-- > 0;) acc = pair(items[i], acc);
  return acc;
}

Sort Term::sort() const { return node_->sort; }

std::vector<Term> Term::tuple_items() const {
  std::vector<Term> out;
  Term cur = *this;
  while (cur.is_pair()) {
    out.push_back(cur.args()[0]);
    cur = cur.args()[1];
  }
  out.push_back(cur);
  return out;
}

std::string Term::str() const {
  std::call_once(node_->text_once, [this] { node_->text = render(); });
  return node_->text;
}

std::string Term::render() const {
  switch (kind()) {
    case Kind::PubName: return "'" + name() + "'";
    case Kind::FreshName: return "~" + name();
    case Kind::Var: return name();
    case Kind::App: break;
  }
  std::ostringstream os;
  if (is_pair()) {
    auto items = tuple_items();
    os << '<';
    for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << items[i].str();
    os << '>';
    return os.str();
  }
  os << name() << '(';
  for (std::size_t i = 0; i < arity(); ++i) os << (i ? ", " : "") << args()[i].str();
  os << ')';
  return os.str();
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return Term::compare(a, b) == 0;
}

int Term::compare(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  if (int c = a.name().compare(b.name()); c != 0) return c < 0 ? -1 : 1;
  if (a.sort() != b.sort()) return a.sort() < b.sort() ? -1 : 1;
  if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (int c = compare(a.args()[i], b.args()[i]); c != 0) return c;
  }
  return 0;
}

Term substitute(const Term& t, const Substitution& s) {
  if (t.ground() || s.empty()) return t;
  if (t.is_var()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(substitute(a, s));
  return Term::app(t.name(), std::move(args));
}

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

void collect_var_terms(const Term& t, std::vector<Term>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    for (const auto& v : out)
      if (v.name() == t.name()) return;
    out.push_back(t);
    return;
  }
  for (const auto& a : t.args()) collect_var_terms(a, out);
}

void collect_fresh_names(const Term& t, TermSet& out) {
  if (t.kind() == Term::Kind::FreshName) out.insert(t);
  for (const auto& a : t.args()) collect_fresh_names(a, out);
}

bool contains_symbol(const Term& t, const std::string& symbol) {
  if (!t.is_app()) return false;
  if (t.name() == symbol) return true;
  for (const auto& a : t.args())
    if (contains_symbol(a, symbol)) return true;
  return false;
}

Term rename_fresh(const Term& t, const std::map<std::string, std::string>& renaming) {
  if (t.kind() == Term::Kind::FreshName) {
    auto it = renaming.find(t.name());
    return it == renaming.end() ? t : Term::fresh(it->second);
  }
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(rename_fresh(a, renaming));
  return Term::app(t.name(), std::move(args));
}

Signature::Signature() {
  add_function({"pair", 2, false});
  add_function({"fst", 1, false});
  add_function({"snd", 1, false});
  add_function({"true", 0, false});
}

void Signature::add_function(const FunctionSymbol& f) {
  if (facts_.count(f.name))
    throw TermError(TermError::Kind::SymbolClash, "symbol '" + f.name + "' already declared as a fact");
  auto it = functions_.find(f.name);
  if (it != functions_.end() && (it->second.arity != f.arity || it->second.is_private != f.is_private))
    throw TermError(TermError::Kind::ArityMismatch, "conflicting declaration of '" + f.name + "'");
  functions_[f.name] = f;
}

void Signature::add_fact(const std::string& name, std::size_t arity) {
  if (functions_.count(name))
    throw TermError(TermError::Kind::SymbolClash, "fact '" + name + "' clashes with a function symbol");
  auto it = facts_.find(name);
  if (it != facts_.end() && it->second != arity)
    throw TermError(TermError::Kind::ArityMismatch,
                    "fact '" + name + "' used with arities " + std::to_string(it->second) + " and " +
                        std::to_string(arity));
  facts_[name] = arity;
}

const FunctionSymbol* Signature::function(const std::string& name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

std::optional<std::size_t> Signature::fact_arity(const std::string& name) const {
  auto it = facts_.find(name);
  if (it == facts_.end()) return std::nullopt;
  return it->second;
}

bool Signature::is_private(const std::string& name) const {
  const auto* f = function(name);
  return f && f->is_private;
}

bool Signature::has_private_symbols() const {
  for (const auto& [n, f] : functions_)
    if (f.is_private) return true;
  return false;
}

RewriteSystem::RewriteSystem(std::vector<RewriteRule> rules) : rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    destructors_.insert(rules_[i].lhs.name());
    by_root_[rules_[i].lhs.name()].push_back(i);
  }
}

const std::vector<std::size_t>& RewriteSystem::rules_for(const std::string& symbol) const {
  static const std::vector<std::size_t> none;
  auto it = by_root_.find(symbol);
  return it == by_root_.end() ? none : it->second;
}

namespace {

bool is_strict_subterm(const Term& sub, const Term& t) {
  for (const auto& a : t.args())
    if (a == sub || is_strict_subterm(sub, a)) return true;
  return false;
}

}  // namespace

RewriteSystem orient_theory(const std::vector<Equation>& equations) {
  std::vector<RewriteRule> rules;
  const Term x = Term::var("x"), y = Term::var("y");
  rules.push_back({Term::app("fst", {Term::pair(x, y)}), x});
  rules.push_back({Term::app("snd", {Term::pair(x, y)}), y});
  for (const auto& eq : equations) {
    std::set<std::string> lv, rv;
    collect_vars(eq.lhs, lv);
    collect_vars(eq.rhs, rv);
    for (const auto& v : rv)
      if (!lv.count(v))
        throw TermError(TermError::Kind::VariableEscape,
                        "variable '" + v + "' of " + eq.rhs.str() + " does not occur in " + eq.lhs.str());
    if (!eq.lhs.is_app())
      throw TermError(TermError::Kind::NonOrientable, "left-hand side " + eq.lhs.str() + " is not an application");
    bool constant = eq.rhs.ground() && (eq.rhs.is_name() || eq.rhs.arity() == 0);
    if (!constant && !is_strict_subterm(eq.rhs, eq.lhs))
      throw TermError(TermError::Kind::NonOrientable,
                      eq.lhs.str() + " = " + eq.rhs.str() + " is not subterm-convergent");
    rules.push_back({eq.lhs, eq.rhs});
  }
  return RewriteSystem(std::move(rules));
}

bool match_syntactic(const Term& pattern, const Term& target, Substitution& s) {
  switch (pattern.kind()) {
    case Term::Kind::Var: {
      if (pattern.sort() == Sort::Pub && target.kind() != Term::Kind::PubName) return false;
      if (pattern.sort() == Sort::Fresh && target.kind() != Term::Kind::FreshName) return false;
      auto [it, inserted] = s.emplace(pattern.name(), target);
      return inserted || it->second == target;
    }
    case Term::Kind::PubName:
    case Term::Kind::FreshName:
      return pattern == target;
    case Term::Kind::App:
      if (pattern.ground()) return pattern == target;
      if (!target.is_app() || target.name() != pattern.name() || target.arity() != pattern.arity())
        return false;
      for (std::size_t i = 0; i < pattern.arity(); ++i)
        if (!match_syntactic(pattern.args()[i], target.args()[i], s)) return false;
      return true;
  }
  return false;
}

namespace {

std::optional<Term> rewrite_root(const Term& t, const RewriteSystem& rs) {
  for (std::size_t idx : rs.rules_for(t.name())) {
    const auto& rule = rs.rules()[idx];
    Substitution s;
    if (match_syntactic(rule.lhs, t, s)) return substitute(rule.rhs, s);
  }
  return std::nullopt;
}

}  // namespace

Term normalize(const Term& t, const RewriteSystem& rs) {
  if (!t.is_app() || (t.arity() == 0 && !rs.is_destructor(t.name()))) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const auto& a : t.args()) {
    args.push_back(normalize(a, rs));
    changed = changed || !(args.back() == a);
  }
  Term cur = changed ? Term::app(t.name(), std::move(args)) : t;
  if (!rs.is_destructor(cur.name())) return cur;
  if (auto r = rewrite_root(cur, rs)) return normalize(*r, rs);
  return cur;
}

bool equal_mod_E(const Term& a, const Term& b, const RewriteSystem& rs) {
  return normalize(a, rs) == normalize(b, rs);
}

std::optional<Substitution> match_pattern(const Term& pattern, const Term& target,
                                          const RewriteSystem& rs) {
  Substitution s;
  if (!match_syntactic(normalize(pattern, rs), normalize(target, rs), s)) return std::nullopt;
  return s;
}

TermSet subterm_closure(const TermSet& ts, const RewriteSystem& rs) {
  TermSet out;
  std::vector<Term> work;
  for (const auto& t : ts) work.push_back(normalize(t, rs));
  while (!work.empty()) {
    Term t = work.back();
    work.pop_back();
    if (!out.insert(t).second) continue;
    for (const auto& a : t.args()) work.push_back(a);
  }
  return out;
}

}  // namespace veracct
