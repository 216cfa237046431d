#include "veracct/deduction.hpp"

#include <algorithm>
#include <functional>

namespace veracct {

namespace {

bool deducible_in(const TermSet& derived, const TermSet& restricted, const Term& t, const Signature& sig) {
  if (derived.count(t)) return true;
  switch (t.kind()) {
    case Term::Kind::PubName: return true;
    case Term::Kind::FreshName: return !restricted.count(t);
    case Term::Kind::Var: return false;
    case Term::Kind::App: break;
  }
  if (sig.is_private(t.name())) return false;
  for (const auto& a : t.args())
    if (!deducible_in(derived, restricted, a, sig)) return false;
  return true;
}

// Matches `p` against terms the adversary can produce: either a derived term
// as a whole, or a public constructor application whose arguments match
// recursively. Unbound variables at leaves stay unbound.
void match_producible(const Term& p, const TermSet& derived, const TermSet& restricted,
                      const Signature& sig, const RewriteSystem& rs, const Substitution& s,
                      std::vector<Substitution>& out) {
  Term q = substitute(p, s);
  if (q.ground()) {
    if (deducible_in(derived, restricted, normalize(q, rs), sig)) out.push_back(s);
    return;
  }
  if (q.is_var()) {
    out.push_back(s);
    return;
  }
  for (const auto& u : derived) {
    Substitution s2 = s;
    if (match_syntactic(q, u, s2)) out.push_back(std::move(s2));
  }
  if (sig.is_private(q.name()) || rs.is_destructor(q.name())) return;
  std::vector<Substitution> partial{s};
  for (const auto& a : q.args()) {
    std::vector<Substitution> next;
    for (const auto& ps : partial) match_producible(a, derived, restricted, sig, rs, ps, next);
    partial = std::move(next);
    if (partial.empty()) return;
  }
  for (auto& ps : partial) out.push_back(std::move(ps));
}

}  // namespace

KnowledgeBase saturate(const Frame& f, const RewriteSystem& rs, const Signature& sig, int bound) {
  KnowledgeBase kb;
  kb.frame_ = f;
  kb.bound_ = bound;
  for (const auto& o : f.outputs) kb.derived_.insert(normalize(o, rs));
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Term> added;
    for (const auto& rule : rs.rules()) {
      if (rule.rhs.ground()) continue;  // constant results are public or never derivable this way
      std::vector<Substitution> subs{Substitution{}};
      for (const auto& arg : rule.lhs.args()) {
        std::vector<Substitution> next;
        for (const auto& s : subs) match_producible(arg, kb.derived_, f.restricted, sig, rs, s, next);
        subs = std::move(next);
      }
      for (const auto& s : subs) {
        Term r = substitute(rule.rhs, s);
        if (!r.ground()) continue;
        r = normalize(r, rs);
        if (!kb.derived_.count(r)) added.push_back(r);
      }
    }
    for (auto& t : added) changed = kb.derived_.insert(std::move(t)).second || changed;
  }
  return kb;
}

bool deducible(const KnowledgeBase& kb, const Term& t, const RewriteSystem& rs, const Signature& sig) {
  if (!t.ground()) return false;
  return deducible_in(kb.derived(), kb.frame().restricted, normalize(t, rs), sig);
}

bool deducible(const Frame& f, const Term& t, const RewriteSystem& rs, const Signature& sig) {
  return deducible(saturate(f, rs, sig), t, rs, sig);
}

namespace {

struct Partial {
  Substitution s;
  int cost;
};

class Synthesizer {
 public:
  Synthesizer(const KnowledgeBase& kb, const RewriteSystem& rs, const Signature& sig, const SynthOptions& opt)
      : kb_(kb), rs_(rs), sig_(sig), opt_(opt) {
    for (const auto& t : kb.derived()) pool_.insert(t);
    for (const auto& c : opt.constants) pool_.insert(c);
  }

  void gen(const Term& p, const Partial& in, std::vector<Partial>& out) {
    Term q = substitute(p, in.s);
    if (q.ground()) {
      if (deducible(kb_, q, rs_, sig_)) out.push_back(in);
      return;
    }
    if (q.is_var()) {
      if (in.cost >= opt_.depth) return;
      for (const auto& a : pool_) {
        if (q.sort() == Sort::Pub && a.kind() != Term::Kind::PubName) continue;
        if (q.sort() == Sort::Fresh && a.kind() != Term::Kind::FreshName) continue;
        Partial next = in;
        next.s[q.name()] = a;
        next.cost += 1;
        out.push_back(std::move(next));
      }
      return;
    }
    for (const auto& u : kb_.derived()) {
      Partial next = in;
      if (match_syntactic(q, u, next.s)) out.push_back(std::move(next));
    }
    if (sig_.is_private(q.name()) || rs_.is_destructor(q.name())) return;
    std::vector<Partial> partial{in};
    for (const auto& a : q.args()) {
      std::vector<Partial> next;
      for (const auto& ps : partial) gen(a, ps, next);
      partial = std::move(next);
      if (partial.empty()) return;
    }
    for (auto& ps : partial) out.push_back(std::move(ps));
  }

 private:
  const KnowledgeBase& kb_;
  const RewriteSystem& rs_;
  const Signature& sig_;
  const SynthOptions& opt_;
  TermSet pool_;
};

}  // namespace

SynthResult synth_matches(const KnowledgeBase& kb, const Term& pattern, const RewriteSystem& rs,
                          const Signature& sig, const SynthOptions& opt) {
  SynthResult res;
  Synthesizer syn(kb, rs, sig, opt);
  std::vector<Partial> raw;
  syn.gen(normalize(pattern, rs), Partial{{}, 0}, raw);
  std::set<Substitution> seen;
  for (auto& p : raw) {
    Term inst = normalize(substitute(pattern, p.s), rs);
    if (!inst.ground() || !deducible(kb, inst, rs, sig)) continue;
    auto tau = match_pattern(pattern, inst, rs);
    if (!tau) continue;
    if (!seen.insert(*tau).second) continue;
    if (res.matches.size() >= opt.max_candidates) {
      res.truncated = true;
      break;
    }
    res.matches.push_back(std::move(*tau));
  }
  return res;
}

TermSet synth_inputs(const KnowledgeBase& kb, const RewriteSystem& rs, const Signature& sig,
                     const SynthOptions& opt, const std::vector<Term>& shape_hints) {
  TermSet layer = kb.derived();
  for (const auto& c : opt.constants) layer.insert(c);
  TermSet out = layer;
  std::vector<FunctionSymbol> ctors;
  for (const auto& [name, f] : sig.functions())
    if (!f.is_private && !rs.is_destructor(name) && f.arity > 0) ctors.push_back(f);
  for (int d = 0; d < opt.depth && !out.empty() && out.size() < 20000; ++d) {
    TermSet next;
    std::vector<Term> base(out.begin(), out.end());
    for (const auto& f : ctors) {
      std::vector<std::size_t> idx(f.arity, 0);
      while (true) {
        std::vector<Term> args;
        for (auto i : idx) args.push_back(base[i]);
        Term t = normalize(Term::app(f.name, args), rs);
        if (!out.count(t)) next.insert(t);
        std::size_t k = 0;
        while (k < f.arity && ++idx[k] == base.size()) idx[k++] = 0;
        if (k == f.arity) break;
      }
    }
    if (next.empty()) break;
    out.insert(next.begin(), next.end());
  }
  for (const auto& h : shape_hints) {
    auto r = synth_matches(kb, h, rs, sig, opt);
    for (const auto& s : r.matches) out.insert(normalize(substitute(h, s), rs));
  }
  TermSet checked;
  for (const auto& t : out)
    if (deducible(kb, t, rs, sig)) checked.insert(t);
  return checked;
}

}  // namespace veracct
