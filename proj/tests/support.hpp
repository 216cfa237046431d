#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "veracct/corpus.hpp"
#include "veracct/formula.hpp"
#include "veracct/trace.hpp"

namespace veracct::testing {

inline Model corpus_model(const std::string& name) {
  return load_model(std::string(VERACCT_CORPUS_DIR) + "/" + name + ".acc");
}

inline Term p(const char* n) { return Term::pub(n); }

// Random traces over A/1, B/2, C/0 and random formulas whose quantified
// variables are all guarded by a positive A or B atom.
struct Gen {
  std::mt19937 rng;
  std::vector<Term> atoms{p("a"), p("b"), Term::fresh("n.1"), Term::pair(p("a"), p("b"))};
  int counter = 0;

  explicit Gen(unsigned seed) : rng(seed) {}
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Trace trace() {
    Trace t;
    int len = pick(5);
    for (int i = 0; i < len; ++i) {
      std::vector<Fact> fs;
      int nf = 1 + pick(2);
      for (int k = 0; k < nf; ++k) {
        switch (pick(3)) {
          case 0: fs.push_back({"A", {atoms[pick(4)]}}); break;
          case 1: fs.push_back({"B", {atoms[pick(4)], atoms[pick(4)]}}); break;
          default: fs.push_back({"C", {}}); break;
        }
      }
      std::sort(fs.begin(), fs.end());
      fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
      t.steps.push_back(TraceStep{fs, "", ""});
    }
    return t;
  }

  Term msg_term(const std::vector<Term>& vars) {
    if (!vars.empty() && pick(2)) return vars[pick(static_cast<int>(vars.size()))];
    return atoms[pick(3)];
  }

  // Guarded formulas over A/1, B/2, C/0 with the given bound variables in scope.
  FormulaPtr formula(int depth, std::vector<Term> msgs, std::vector<Term> times) {
    int choice = depth <= 0 ? pick(3) : pick(9);
    switch (choice) {
      case 0:
        if (times.empty()) return fm::verum();
        return fm::action("C", {}, times[pick(static_cast<int>(times.size()))]);
      case 1:
        if (times.empty()) return fm::eq_term(msg_term(msgs), msg_term(msgs));
        return fm::action("A", {msg_term(msgs)}, times[pick(static_cast<int>(times.size()))]);
      case 2:
        if (times.size() < 2) return fm::falsum();
        return fm::less(times[0], times[1]);
      case 3: return fm::neg(formula(depth - 1, msgs, times));
      case 4: return fm::conj(formula(depth - 1, msgs, times), formula(depth - 1, msgs, times));
      case 5: return fm::disj(formula(depth - 1, msgs, times), formula(depth - 1, msgs, times));
      case 6: return fm::implies(formula(depth - 1, msgs, times), formula(depth - 1, msgs, times));
      default: {
        Term i = fm::tvar("i" + std::to_string(++counter));
        Term x = Term::var("x" + std::to_string(counter), pick(3) == 0 ? Sort::Pub : Sort::Msg);
        auto ms = msgs;
        auto ts = times;
        ms.push_back(x);
        ts.push_back(i);
        FormulaPtr guard = pick(2) ? fm::action("A", {x}, i) : fm::action("B", {x, msg_term(msgs)}, i);
        FormulaPtr body = formula(depth - 1, ms, ts);
        if (choice == 7) return fm::exists({x, i}, fm::conj(guard, body));
        return fm::forall({x, i}, fm::implies(guard, body));
      }
    }
  }
};

}  // namespace veracct::testing
