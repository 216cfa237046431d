#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "veracct/term.hpp"

namespace veracct {

struct Process;
using ProcPtr = std::shared_ptr<const Process>;

struct Condition {
  std::string predicate;
  std::vector<Term> args;
};

struct Process {
  enum class Kind {
    Nil, Par, Repl, New, Out, In, Cond, Event, Choice, Insert, Delete, Lookup, Lock, Unlock, Tag
  };

  Kind kind = Kind::Nil;
  ProcPtr p, q;
  // New: t1 is the bound variable (sort fresh). Out: channel t1, message t2.
  // In: channel t1, pattern t2. Insert: key t1, value t2. Delete/Lock/Unlock: t1.
  // Lookup: key t1, bound variable t2.
  Term t1, t2;
  Condition cond;               // Cond
  std::string fact;             // Event
  std::vector<Term> fact_args;  // Event
  std::string owner;            // Tag: the party whose role this is
  bool implicit = false;        // Nil standing for an omitted else branch

  const std::string& str() const;  // cached, stable textual form

  static ProcPtr nil(bool implicit = false);
  static ProcPtr par(ProcPtr a, ProcPtr b);
  static ProcPtr repl(ProcPtr a);
  static ProcPtr make_new(const Term& var, ProcPtr cont);
  static ProcPtr out(const Term& ch, const Term& msg, ProcPtr cont);
  static ProcPtr in(const Term& ch, const Term& pattern, ProcPtr cont);
  static ProcPtr cond_(Condition c, ProcPtr then_p, ProcPtr else_p);
  static ProcPtr event(const std::string& fact, std::vector<Term> args, ProcPtr cont);
  static ProcPtr choice(ProcPtr a, ProcPtr b);
  static ProcPtr insert(const Term& key, const Term& value, ProcPtr cont);
  static ProcPtr remove(const Term& key, ProcPtr cont);
  static ProcPtr lookup(const Term& key, const Term& var, ProcPtr then_p, ProcPtr else_p);
  static ProcPtr lock(const Term& t, ProcPtr cont);
  static ProcPtr unlock(const Term& t, ProcPtr cont);
  static ProcPtr tag(const std::string& owner, ProcPtr cont);

 private:
  mutable std::once_flag text_once_;
  mutable std::string text_;
};

// Capture-avoiding for the binders the calculus has: New, In, Lookup.
ProcPtr substitute(const ProcPtr& p, const Substitution& s);

// Variables occurring free (unbound by New/In/Lookup).
std::set<std::string> free_vars(const ProcPtr& p);

}  // namespace veracct
