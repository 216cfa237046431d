#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace veracct {

enum class Sort { Pub, Fresh, Msg, Temp };

const char* sort_name(Sort s);
// Subsort order: pub <= msg, fresh <= msg, temp only relates to itself.
bool sort_leq(Sort lower, Sort upper);

class Term {
 public:
  enum class Kind { PubName, FreshName, Var, App };

  Term();  // the public name '' (only used as a placeholder)

  static Term pub(const std::string& name);
  static Term fresh(const std::string& name);
  static Term var(const std::string& name, Sort sort = Sort::Msg);
  static Term app(const std::string& symbol, std::vector<Term> args);
  static Term pair(const Term& a, const Term& b);
  // Right-nested tuple <t1, <t2, ... tn>>; a single element is returned as is.
  static Term tuple(const std::vector<Term>& items);

  Kind kind() const { return node_->kind; }
  const std::string& name() const { return node_->name; }
  Sort sort() const;
  const std::vector<Term>& args() const { return node_->args; }
  std::size_t arity() const { return node_->args.size(); }
  std::size_t hash() const { return node_->hash; }
  std::size_t size() const { return node_->size; }

  bool is_name() const { return kind() == Kind::PubName || kind() == Kind::FreshName; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_app() const { return kind() == Kind::App; }
  bool is_app(const std::string& symbol, std::size_t n) const {
    return is_app() && name() == symbol && arity() == n;
  }
  bool is_pair() const { return is_app("pair", 2); }
  bool ground() const { return node_->ground; }

  // Components of a right-nested pair chain; a non-pair yields itself.
  std::vector<Term> tuple_items() const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }
  static int compare(const Term& a, const Term& b);

 private:
  struct Node {
    Node(Kind k, Sort s, std::string n, std::vector<Term> a, std::size_t h, std::size_t sz, bool g)
        : kind(k), sort(s), name(std::move(n)), args(std::move(a)), hash(h), size(sz), ground(g) {}
    Kind kind;
    Sort sort;
    std::string name;
    std::vector<Term> args;
    std::size_t hash;
    std::size_t size;
    bool ground;
    mutable std::once_flag text_once;
    mutable std::string text;
  };
  std::string render() const;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(Kind k, Sort s, std::string name, std::vector<Term> args);
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

using TermSet = std::set<Term>;

// Variables are keyed by name; the sort lives in the variable term itself.
using Substitution = std::map<std::string, Term>;

Term substitute(const Term& t, const Substitution& s);
void collect_vars(const Term& t, std::set<std::string>& out);
void collect_var_terms(const Term& t, std::vector<Term>& out);
void collect_fresh_names(const Term& t, TermSet& out);
bool contains_symbol(const Term& t, const std::string& symbol);
Term rename_fresh(const Term& t, const std::map<std::string, std::string>& renaming);

struct FunctionSymbol {
  std::string name;
  std::size_t arity = 0;
  bool is_private = false;
};

class TermError : public std::runtime_error {
 public:
  enum class Kind { NonOrientable, VariableEscape, UnknownSymbol, ArityMismatch, SymbolClash };
  TermError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

class Signature {
 public:
  Signature();  // built-ins pair/2, fst/1, snd/1, true/0

  void add_function(const FunctionSymbol& f);
  void add_fact(const std::string& name, std::size_t arity);

  const FunctionSymbol* function(const std::string& name) const;
  bool has_function(const std::string& name) const { return function(name) != nullptr; }
  std::optional<std::size_t> fact_arity(const std::string& name) const;
  bool is_private(const std::string& name) const;
  bool has_private_symbols() const;

  const std::map<std::string, FunctionSymbol>& functions() const { return functions_; }
  const std::map<std::string, std::size_t>& facts() const { return facts_; }

 private:
  std::map<std::string, FunctionSymbol> functions_;
  std::map<std::string, std::size_t> facts_;
};

struct Equation {
  Term lhs;
  Term rhs;
};

struct RewriteRule {
  Term lhs;
  Term rhs;
};

class RewriteSystem {
 public:
  RewriteSystem() = default;
  explicit RewriteSystem(std::vector<RewriteRule> rules);

  const std::vector<RewriteRule>& rules() const { return rules_; }
  bool is_destructor(const std::string& symbol) const { return destructors_.count(symbol) > 0; }
  const std::set<std::string>& destructors() const { return destructors_; }
  // Rules whose lhs root is the given symbol.
  const std::vector<std::size_t>& rules_for(const std::string& symbol) const;

 private:
  std::vector<RewriteRule> rules_;
  std::set<std::string> destructors_;
  std::map<std::string, std::vector<std::size_t>> by_root_;
};

// The built-in projections fst/snd are always part of the returned system.
RewriteSystem orient_theory(const std::vector<Equation>& equations);

Term normalize(const Term& t, const RewriteSystem& rs);
bool equal_mod_E(const Term& a, const Term& b, const RewriteSystem& rs);

// Syntactic matching (non-linear, sort-aware), extending `s`.
bool match_syntactic(const Term& pattern, const Term& target, Substitution& s);
std::optional<Substitution> match_pattern(const Term& pattern, const Term& target,
                                          const RewriteSystem& rs);

TermSet subterm_closure(const TermSet& ts, const RewriteSystem& rs);

}  // namespace veracct
