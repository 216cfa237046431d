#include "veracct/parser.hpp"

#include "veracct/tracelogic.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>

namespace veracct {

namespace {

struct Token {
  enum class Type { Ident, Quoted, Number, Sym, End };
  Type type;
  std::string text;
  int line;
  int col;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  static const char* multi[] = {"==>", "<=>", "->", "||"};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (src.compare(i, 2, "/*") == 0) {
      int l = line, cl = col;
      advance(2);
      while (i < src.size() && src.compare(i, 2, "*/") != 0) advance(1);
      if (i >= src.size()) throw ModelError("unterminated comment", l, cl);
      advance(2);
      continue;
    }
    Token t{Token::Type::Sym, "", line, col};
    if (c == '\'') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '\'' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '\'') throw ModelError("unterminated quoted constant", line, col);
      t.type = Token::Type::Quoted;
      t.text = src.substr(i + 1, j - i - 1);
      advance(j + 1 - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && ident_char(src[j])) {
        while (j < src.size() && ident_char(src[j])) ++j;
        t.type = Token::Type::Ident;
      } else {
        t.type = Token::Type::Number;
      }
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (ident_char(c) || ((c == '~' || c == '#' || c == '$') && i + 1 < src.size() && ident_char(src[i + 1]))) {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      while (j < src.size() && src[j] == '\'' && (j + 1 >= src.size() || !ident_char(src[j + 1]))) ++j;
      t.type = Token::Type::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    bool matched = false;
    for (const char* m : multi) {
      std::size_t n = std::char_traits<char>::length(m);
      if (src.compare(i, n, m) == 0) {
        t.text = m;
        advance(n);
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (std::string("()<>{}[],;.:=|&!+@/-*").find(c) == std::string::npos)
        throw ModelError(std::string("unexpected character '") + c + "'", line, col);
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(t);
  }
  out.push_back({Token::Type::End, "", line, col});
  return out;
}

struct RawTerm {
  enum class Kind { Ident, Quoted, App, Tuple };
  Kind kind;
  std::string name;
  std::vector<RawTerm> args;
  int line = 0, col = 0;
};

struct RawFormula {
  enum class Kind { False, True, Action, Eq, Less, Not, And, Or, Implies, Iff, Exists, Forall };
  Kind kind;
  std::string fact;
  std::vector<RawTerm> args;
  RawTerm l, r;  // Action: l is the time identifier
  std::vector<std::unique_ptr<RawFormula>> kids;
  std::vector<std::pair<std::string, std::optional<Sort>>> vars;
  int line = 0, col = 0;
};

const std::set<std::string> kSectionKeywords = {"functions", "equations", "predicates", "parties", "trusted",
                                                "verdict",   "property",  "relation",   "bounds",  "options"};
const std::set<std::string> kProcessKeywords = {"new",    "out",    "in",  "if",     "then",    "else",
                                                "event",  "insert", "delete", "lookup", "as", "lock",
                                                "unlock", "let",    "process", "main"};

struct ProcDef {
  std::string name;
  std::vector<std::string> params;
  std::size_t begin = 0, end = 0;
};

enum class TermMode { Expression, Pattern, Equation, Formula };

struct Scope {
  std::map<std::string, Term> vars;         // identifier -> variable (or bound value)
  std::map<std::string, RawTerm> lets;      // literal substitution
  std::map<std::string, Term> formula_vars; // quantified formula variables
};

class Parser {
 public:
  Parser(std::vector<Token> toks, Model& m) : toks_(std::move(toks)), m_(m) {}

  void parse_document();
  FormulaPtr formula_only();
  Term term_only();
  ProcPtr process_only();

 private:
  // token helpers
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().type == Token::Type::End || pos_ >= limit_; }
  bool is_sym(const std::string& s, std::size_t k = 0) const {
    return pos_ + k < limit_ && peek(k).type == Token::Type::Sym && peek(k).text == s;
  }
  bool is_ident(const std::string& s, std::size_t k = 0) const {
    return pos_ + k < limit_ && peek(k).type == Token::Type::Ident && peek(k).text == s;
  }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const { throw ModelError(msg, t.line, t.col); }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    fail(msg + (at_end() ? " (found end of section)" : " (found '" + t.text + "')"), t);
  }
  const Token& next() {
    if (at_end()) fail("unexpected end of input");
    return toks_[pos_++];
  }
  void expect_sym(const std::string& s) {
    if (!is_sym(s)) fail("expected '" + s + "'");
    ++pos_;
  }
  void expect_ident(const std::string& s) {
    if (!is_ident(s)) fail("expected '" + s + "'");
    ++pos_;
  }
  std::string ident() {
    if (at_end() || peek().type != Token::Type::Ident) fail("expected identifier");
    return toks_[pos_++].text;
  }
  int number() {
    if (at_end() || peek().type != Token::Type::Number) fail("expected number");
    return std::stoi(toks_[pos_++].text);
  }
  bool section_start(std::size_t at) const;

  // sections
  void parse_functions();
  void parse_equations();
  void parse_predicates();
  std::vector<std::string> parse_party_list();
  void parse_relation();
  void parse_bounds();
  void parse_options();
  void parse_verdict();

  // terms
  RawTerm raw_term();
  std::vector<RawTerm> raw_args();
  Term resolve(const RawTerm& r, Scope& sc, TermMode mode);
  Term resolve_ident(const RawTerm& r, Scope& sc, TermMode mode);

  // processes
  ProcPtr proc(Scope sc);
  ProcPtr choice(Scope sc);
  ProcPtr prefixed(Scope sc);
  ProcPtr continuation(Scope& sc);
  ProcPtr expand(const ProcDef& def, const std::vector<Term>& args, Scope sc, const Token& at);
  Condition condition(Scope& sc);
  Term bind_var(const std::string& ident, Sort sort, Scope& sc);

  // formulas
  std::unique_ptr<RawFormula> raw_formula();
  std::unique_ptr<RawFormula> raw_implication();
  std::unique_ptr<RawFormula> raw_disj();
  std::unique_ptr<RawFormula> raw_conj();
  std::unique_ptr<RawFormula> raw_unary();
  std::unique_ptr<RawFormula> raw_atom();
  FormulaPtr build(const RawFormula& f, Scope& sc);
  FormulaPtr formula(Scope sc = {});

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t limit_ = static_cast<std::size_t>(-1);
  Model& m_;
  std::map<std::string, ProcDef> defs_;
  std::vector<std::string> expanding_;
  int fresh_counter_ = 0;
  std::set<std::string> role_expanded_;

  friend Model veracct::parse_model(const std::string&, const std::string&);
};

bool Parser::section_start(std::size_t at) const {
  const Token& t = toks_[at];
  if (t.type != Token::Type::Ident) return false;
  const Token& n = toks_[std::min(at + 1, toks_.size() - 1)];
  if (kSectionKeywords.count(t.text)) return n.type == Token::Type::Sym && n.text == ":";
  if (t.text == "process") return n.type == Token::Type::Ident;
  if (t.text == "main") return n.type == Token::Type::Sym && n.text == "=";
  return false;
}

// ---------------------------------------------------------------- terms

RawTerm Parser::raw_term() {
  const Token& t = peek();
  RawTerm r;
  r.line = t.line;
  r.col = t.col;
  if (t.type == Token::Type::Quoted) {
    ++pos_;
    r.kind = RawTerm::Kind::Quoted;
    r.name = t.text;
    return r;
  }
  if (is_sym("<")) {
    ++pos_;
    r.kind = RawTerm::Kind::Tuple;
    r.args.push_back(raw_term());
    while (is_sym(",")) {
      ++pos_;
      r.args.push_back(raw_term());
    }
    expect_sym(">");
    if (r.args.size() == 1) return r.args[0];
    return r;
  }
  if (t.type == Token::Type::Ident && !kProcessKeywords.count(t.text)) {
    ++pos_;
    r.name = t.text;
    if (is_sym("(")) {
      r.kind = RawTerm::Kind::App;
      r.args = raw_args();
    } else {
      r.kind = RawTerm::Kind::Ident;
    }
    return r;
  }
  fail("expected a term");
}

std::vector<RawTerm> Parser::raw_args() {
  expect_sym("(");
  std::vector<RawTerm> args;
  if (is_sym(")")) {
    ++pos_;
    return args;
  }
  args.push_back(raw_term());
  while (is_sym(",")) {
    ++pos_;
    args.push_back(raw_term());
  }
  expect_sym(")");
  return args;
}

Term Parser::bind_var(const std::string& ident, Sort sort, Scope& sc) {
  std::string base = ident;
  if (!base.empty() && (base[0] == '~' || base[0] == '$')) base = base.substr(1);
  Term v = Term::var(base + "#" + std::to_string(++fresh_counter_), sort);
  sc.vars[ident] = v;
  if (ident[0] == '$') sc.vars[base] = v;
  return v;
}

Term Parser::resolve_ident(const RawTerm& r, Scope& sc, TermMode mode) {
  const std::string& id = r.name;
  if (mode == TermMode::Formula) {
    auto it = sc.formula_vars.find(id);
    if (it != sc.formula_vars.end()) return it->second;
  }
  if (auto it = sc.vars.find(id); it != sc.vars.end()) return it->second;
  if (auto it = sc.lets.find(id); it != sc.lets.end()) {
    RawTerm body = it->second;
    Scope inner = sc;
    inner.lets.erase(id);
    return resolve(body, inner, mode == TermMode::Pattern ? TermMode::Pattern : mode);
  }
  if (const auto* f = m_.sig.function(id); f && f->arity == 0) return Term::app(id, {});
  if (mode == TermMode::Pattern) {
    Sort s = id[0] == '~' ? Sort::Fresh : id[0] == '$' ? Sort::Pub : Sort::Msg;
    return bind_var(id, s, sc);
  }
  if (mode == TermMode::Equation) {
    Term v = Term::var(id, id[0] == '~' ? Sort::Fresh : Sort::Msg);
    sc.vars[id] = v;
    return v;
  }
  throw ModelError("unbound variable '" + id + "'", r.line, r.col);
}

Term Parser::resolve(const RawTerm& r, Scope& sc, TermMode mode) {
  switch (r.kind) {
    case RawTerm::Kind::Quoted:
      return Term::pub(r.name);
    case RawTerm::Kind::Ident:
      return resolve_ident(r, sc, mode);
    case RawTerm::Kind::Tuple: {
      std::vector<Term> items;
      for (const auto& a : r.args) items.push_back(resolve(a, sc, mode));
      return Term::tuple(items);
    }
    case RawTerm::Kind::App: {
      const auto* f = m_.sig.function(r.name);
      if (!f) throw ModelError("unknown function symbol '" + r.name + "'", r.line, r.col);
      if (f->arity != r.args.size())
        throw ModelError("function '" + r.name + "' expects " + std::to_string(f->arity) + " arguments, got " +
                             std::to_string(r.args.size()),
                         r.line, r.col);
      std::vector<Term> args;
      for (const auto& a : r.args) args.push_back(resolve(a, sc, mode));
      return Term::app(r.name, std::move(args));
    }
  }
  throw ModelError("bad term", r.line, r.col);
}

// ---------------------------------------------------------------- sections

void Parser::parse_functions() {
  while (!at_end() && !section_start(pos_)) {
    std::string name = ident();
    expect_sym("/");
    int arity = number();
    bool priv = false;
    if (is_sym("[")) {
      ++pos_;
      expect_ident("private");
      expect_sym("]");
      priv = true;
    }
    try {
      m_.sig.add_function({name, static_cast<std::size_t>(arity), priv});
    } catch (const TermError& e) {
      fail(e.what(), toks_[pos_ - 1]);
    }
    if (is_sym(",")) ++pos_;
  }
}

void Parser::parse_equations() {
  while (!at_end() && !section_start(pos_)) {
    const Token& at = peek();
    Scope sc;
    RawTerm l = raw_term();
    expect_sym("=");
    RawTerm r = raw_term();
    Term lhs = resolve(l, sc, TermMode::Equation);
    Term rhs = resolve(r, sc, TermMode::Equation);
    m_.equations.push_back({lhs, rhs});
    try {
      orient_theory({m_.equations.back()});
    } catch (const TermError& e) {
      fail(e.what(), at);
    }
    if (is_sym(",")) ++pos_;
  }
}

void Parser::parse_predicates() {
  while (!at_end() && !section_start(pos_)) {
    Predicate p;
    p.name = ident();
    expect_sym("(");
    Scope sc;
    while (!is_sym(")")) {
      std::string v = ident();
      p.params.push_back(v);
      sc.formula_vars[v] = Term::var(v);
      if (is_sym(",")) ++pos_;
    }
    ++pos_;
    expect_sym("<=>");
    p.body = formula(sc);
    m_.predicates[p.name] = p;
    if (is_sym(",")) ++pos_;
  }
}

std::vector<std::string> Parser::parse_party_list() {
  std::vector<std::string> out;
  while (!at_end() && !section_start(pos_)) {
    if (peek().type == Token::Type::Quoted)
      out.push_back(next().text);
    else
      out.push_back(ident());
    if (is_sym(",")) ++pos_;
  }
  return out;
}

void Parser::parse_relation() {
  std::string k = ident();
  if (k == "rw") {
    m_.relation.kind = RelationSpec::Kind::RW;
  } else if (k == "rc") {
    m_.relation.kind = RelationSpec::Kind::RC;
  } else if (k == "custom") {
    m_.relation.kind = RelationSpec::Kind::Custom;
    expect_sym("(");
    expect_sym("[");
    while (!is_sym("]")) {
      expect_sym("[");
      std::vector<bool> row;
      while (!is_sym("]")) {
        row.push_back(number() != 0);
        if (is_sym(",")) ++pos_;
      }
      ++pos_;
      m_.relation.lifting.push_back(row);
      if (is_sym(",")) ++pos_;
    }
    ++pos_;
    expect_sym(")");
  } else {
    fail("unknown relation '" + k + "'", toks_[pos_ - 1]);
  }
}

void Parser::parse_bounds() {
  while (!at_end() && !section_start(pos_)) {
    std::string key = ident();
    expect_sym("=");
    int v = number();
    if (v < 0) fail("bounds must be non-negative", toks_[pos_ - 1]);
    if (key == "steps") m_.bounds.max_steps = v;
    else if (key == "repl") m_.bounds.repl_unfold = v;
    else if (key == "synth") m_.bounds.synth_depth = v;
    else if (key == "traces") m_.bounds.max_traces = static_cast<std::size_t>(v);
    else if (key == "states") m_.bounds.max_states = static_cast<std::size_t>(v);
    else if (key == "synth-cap" || key == "cap") m_.bounds.synth_cap = static_cast<std::size_t>(v);
    else fail("unknown bound '" + key + "'", toks_[pos_ - 3]);
    if (is_sym(",")) ++pos_;
  }
}

void Parser::parse_options() {
  while (!at_end() && !section_start(pos_)) {
    const Token& at = peek();
    std::string key = ident();
    while (is_sym("-")) {
      ++pos_;
      key += "-" + ident();
    }
    expect_sym("=");
    Scope sc;
    if (key == "forbid-overwrite") {
      do {
        if (is_sym(",")) ++pos_;
        Term t = resolve(raw_term(), sc, TermMode::Expression);
        m_.options.forbid_overwrite.push_back(t.tuple_items());
      } while (is_sym(",") && (peek(1).type != Token::Type::Ident || peek(2).text != "-"));
    } else if (key == "corruption-event") {
      m_.options.corruption_event = ident();
    } else if (key == "control-event") {
      m_.options.control_event = ident();
    } else if (key == "k-facts") {
      std::string v = ident();
      if (v != "on" && v != "off") fail("k-facts expects on or off", toks_[pos_ - 1]);
      m_.options.record_k = v == "on";
    } else if (key == "constants" || key == "extra-constants") {
      if (key == "constants") m_.options.constants_override = true;
      do {
        if (is_sym(",")) ++pos_;
        m_.options.constants.insert(resolve(raw_term(), sc, TermMode::Expression));
      } while (is_sym(",") && !(peek(1).type == Token::Type::Ident && (is_sym("=", 2) || is_sym("-", 2))));
    } else {
      fail("unknown option '" + key + "'", at);
    }
    if (is_sym(",")) ++pos_;
  }
}

void Parser::parse_verdict() {
  std::vector<std::pair<std::size_t, Verdict>> otherwise;
  while (!at_end() && !section_start(pos_)) {
    expect_ident("case");
    VerdictCase vc;
    std::size_t start = pos_;
    bool is_otherwise = is_ident("otherwise");
    if (is_otherwise) {
      ++pos_;
    } else {
      vc.omega = formula();
    }
    for (std::size_t k = start; k < pos_; ++k) {
      const auto& t = toks_[k];
      if (!vc.source.empty()) vc.source += ' ';
      vc.source += t.type == Token::Type::Quoted ? "'" + t.text + "'" : t.text;
    }
    expect_sym("->");
    expect_sym("{");
    while (!is_sym("}")) {
      expect_sym("{");
      PartySet s;
      while (!is_sym("}")) {
        const Token& pt = peek();
        std::string p = pt.type == Token::Type::Quoted ? next().text : ident();
        if (std::find(m_.parties.begin(), m_.parties.end(), p) == m_.parties.end())
          fail("unknown party '" + p + "' in verdict", pt);
        s.insert(p);
        if (is_sym(",")) ++pos_;
      }
      ++pos_;
      vc.verdict.insert(s);
      if (is_sym(",")) ++pos_;
    }
    ++pos_;
    if (is_otherwise) otherwise.emplace_back(m_.verdict.size(), vc.verdict);
    m_.verdict.push_back(std::move(vc));
  }
  for (const auto& [idx, v] : otherwise) {
    std::vector<FormulaPtr> others;
    for (std::size_t k = 0; k < m_.verdict.size(); ++k)
      if (m_.verdict[k].omega) others.push_back(m_.verdict[k].omega);
    m_.verdict[idx].omega = fm::neg(fm::disj_all(others));
  }
}

// ---------------------------------------------------------------- processes

ProcPtr Parser::proc(Scope sc) {
  ProcPtr left = choice(sc);
  while (is_sym("|") || is_sym("||")) {
    ++pos_;
    ProcPtr right = choice(sc);
    left = Process::par(left, right);
  }
  return left;
}

ProcPtr Parser::choice(Scope sc) {
  ProcPtr left = prefixed(sc);
  while (is_sym("+")) {
    ++pos_;
    ProcPtr right = prefixed(sc);
    left = Process::choice(left, right);
  }
  return left;
}

ProcPtr Parser::continuation(Scope& sc) {
  if (is_sym(";")) {
    ++pos_;
    return prefixed(sc);
  }
  return Process::nil();
}

Condition Parser::condition(Scope& sc) {
  if (peek().type == Token::Type::Ident && m_.predicates.count(peek().text) && is_sym("(", 1)) {
    const Token& at = peek();
    std::string name = ident();
    auto args = raw_args();
    const auto& pred = m_.predicates.at(name);
    if (pred.params.size() != args.size())
      fail("predicate '" + name + "' expects " + std::to_string(pred.params.size()) + " arguments", at);
    Condition c{name, {}};
    for (const auto& a : args) c.args.push_back(resolve(a, sc, TermMode::Expression));
    return c;
  }
  RawTerm l = raw_term();
  expect_sym("=");
  RawTerm r = raw_term();
  return Condition{"equal", {resolve(l, sc, TermMode::Expression), resolve(r, sc, TermMode::Expression)}};
}

ProcPtr Parser::prefixed(Scope sc) {
  const Token& t = peek();
  if (t.type == Token::Type::Number && t.text == "0") {
    ++pos_;
    return Process::nil();
  }
  if (is_sym("(")) {
    ++pos_;
    ProcPtr p = proc(sc);
    expect_sym(")");
    return p;
  }
  if (is_sym("!")) {
    ++pos_;
    return Process::repl(prefixed(sc));
  }
  if (t.type != Token::Type::Ident) fail("expected a process");
  const std::string kw = t.text;
  if (kw == "new") {
    ++pos_;
    std::string id = ident();
    Term v = bind_var(id, Sort::Fresh, sc);
    expect_sym(";");
    return Process::make_new(v, prefixed(sc));
  }
  if (kw == "out" || kw == "in") {
    ++pos_;
    auto args = raw_args();
    if (args.empty() || args.size() > 2) fail(kw + " expects one or two arguments", t);
    Term ch = args.size() == 2 ? resolve(args[0], sc, TermMode::Expression) : Term::pub("c");
    if (kw == "out") {
      Term msg = resolve(args.back(), sc, TermMode::Expression);
      return Process::out(ch, msg, continuation(sc));
    }
    Term pat = resolve(args.back(), sc, TermMode::Pattern);
    return Process::in(ch, pat, continuation(sc));
  }
  if (kw == "event") {
    ++pos_;
    const Token& ft = peek();
    std::string name = ident();
    std::vector<RawTerm> raw;
    if (is_sym("(")) raw = raw_args();
    std::vector<Term> args;
    for (const auto& a : raw) args.push_back(resolve(a, sc, TermMode::Expression));
    try {
      m_.sig.add_fact(name, args.size());
    } catch (const TermError& e) {
      fail(e.what(), ft);
    }
    return Process::event(name, std::move(args), continuation(sc));
  }
  if (kw == "insert") {
    ++pos_;
    Term k = resolve(raw_term(), sc, TermMode::Expression);
    expect_sym(",");
    Term v = resolve(raw_term(), sc, TermMode::Expression);
    return Process::insert(k, v, continuation(sc));
  }
  if (kw == "delete" || kw == "lock" || kw == "unlock") {
    ++pos_;
    Term k = resolve(raw_term(), sc, TermMode::Expression);
    ProcPtr c = continuation(sc);
    if (kw == "delete") return Process::remove(k, c);
    if (kw == "lock") return Process::lock(k, c);
    return Process::unlock(k, c);
  }
  if (kw == "if") {
    ++pos_;
    Condition c = condition(sc);
    expect_ident("then");
    ProcPtr then_p = prefixed(sc);
    ProcPtr else_p = Process::nil(true);
    if (is_ident("else")) {
      ++pos_;
      else_p = prefixed(sc);
    }
    return Process::cond_(std::move(c), then_p, else_p);
  }
  if (kw == "lookup") {
    ++pos_;
    Term k = resolve(raw_term(), sc, TermMode::Expression);
    expect_ident("as");
    std::string id = ident();
    expect_ident("in");
    Scope inner = sc;
    Term v = bind_var(id, Sort::Msg, inner);
    ProcPtr then_p = prefixed(inner);
    ProcPtr else_p = Process::nil(true);
    if (is_ident("else")) {
      ++pos_;
      else_p = prefixed(sc);
    }
    return Process::lookup(k, v, then_p, else_p);
  }
  if (kw == "let") {
    ++pos_;
    do {
      std::string id = ident();
      expect_sym("=");
      RawTerm body = raw_term();
      sc.vars.erase(id);
      sc.lets[id] = body;
      if (is_sym(",")) ++pos_;
    } while (!is_ident("in"));
    ++pos_;
    return prefixed(sc);
  }
  if (kProcessKeywords.count(kw)) fail("unexpected keyword '" + kw + "'");
  auto it = defs_.find(kw);
  if (it == defs_.end()) fail("unknown process '" + kw + "'", t);
  ++pos_;
  std::vector<Term> args;
  if (is_sym("(")) {
    for (const auto& a : raw_args()) args.push_back(resolve(a, sc, TermMode::Expression));
  }
  return expand(it->second, args, sc, t);
}

ProcPtr Parser::expand(const ProcDef& def, const std::vector<Term>& args, Scope sc, const Token& at) {
  if (std::find(expanding_.begin(), expanding_.end(), def.name) != expanding_.end())
    fail("recursive process definition '" + def.name + "'", at);
  if (args.size() != def.params.size())
    fail("process '" + def.name + "' expects " + std::to_string(def.params.size()) + " arguments", at);
  for (std::size_t i = 0; i < args.size(); ++i) {
    sc.lets.erase(def.params[i]);
    sc.vars[def.params[i]] = args[i];
  }
  expanding_.push_back(def.name);
  std::size_t saved_pos = pos_, saved_limit = limit_;
  pos_ = def.begin;
  limit_ = def.end;
  ProcPtr body = proc(sc);
  if (pos_ != def.end) fail("unexpected token in process '" + def.name + "'");
  pos_ = saved_pos;
  limit_ = saved_limit;
  expanding_.pop_back();
  bool is_party = std::find(m_.parties.begin(), m_.parties.end(), def.name) != m_.parties.end();
  if (is_party) {
    body = Process::tag(def.name, body);
    if (role_expanded_.insert(def.name).second) m_.roles[def.name] = body;
  }
  return body;
}

// ---------------------------------------------------------------- formulas

std::unique_ptr<RawFormula> Parser::raw_formula() { return raw_implication(); }

std::unique_ptr<RawFormula> Parser::raw_implication() {
  auto left = raw_disj();
  if (is_sym("==>") || is_sym("<=>")) {
    bool iff = is_sym("<=>");
    ++pos_;
    auto f = std::make_unique<RawFormula>();
    f->kind = iff ? RawFormula::Kind::Iff : RawFormula::Kind::Implies;
    f->kids.push_back(std::move(left));
    f->kids.push_back(raw_implication());
    return f;
  }
  return left;
}

std::unique_ptr<RawFormula> Parser::raw_disj() {
  auto left = raw_conj();
  while (is_sym("|")) {
    ++pos_;
    auto f = std::make_unique<RawFormula>();
    f->kind = RawFormula::Kind::Or;
    f->kids.push_back(std::move(left));
    f->kids.push_back(raw_conj());
    left = std::move(f);
  }
  return left;
}

std::unique_ptr<RawFormula> Parser::raw_conj() {
  auto left = raw_unary();
  while (is_sym("&")) {
    ++pos_;
    auto f = std::make_unique<RawFormula>();
    f->kind = RawFormula::Kind::And;
    f->kids.push_back(std::move(left));
    f->kids.push_back(raw_unary());
    left = std::move(f);
  }
  return left;
}

std::unique_ptr<RawFormula> Parser::raw_unary() {
  const Token& t = peek();
  if (is_ident("not")) {
    ++pos_;
    auto f = std::make_unique<RawFormula>();
    f->kind = RawFormula::Kind::Not;
    f->kids.push_back(raw_unary());
    return f;
  }
  if (is_ident("All") || is_ident("Ex")) {
    auto f = std::make_unique<RawFormula>();
    f->kind = t.text == "All" ? RawFormula::Kind::Forall : RawFormula::Kind::Exists;
    f->line = t.line;
    f->col = t.col;
    ++pos_;
    while (!is_sym(".")) {
      std::string v = ident();
      std::optional<Sort> s;
      if (v[0] == '#') {
        v = v.substr(1);
        s = Sort::Temp;
      }
      if (is_sym(":")) {
        ++pos_;
        std::string sn = ident();
        if (sn == "pub") s = Sort::Pub;
        else if (sn == "fresh") s = Sort::Fresh;
        else if (sn == "msg") s = Sort::Msg;
        else if (sn == "temp") s = Sort::Temp;
        else fail("unknown sort '" + sn + "'", toks_[pos_ - 1]);
      }
      f->vars.emplace_back(v, s);
      if (is_sym(",")) ++pos_;
    }
    if (f->vars.empty()) fail("quantifier without variables", t);
    ++pos_;
    f->kids.push_back(raw_formula());
    return f;
  }
  if (is_sym("(")) {
    ++pos_;
    auto f = raw_formula();
    expect_sym(")");
    return f;
  }
  return raw_atom();
}

std::unique_ptr<RawFormula> Parser::raw_atom() {
  const Token& t = peek();
  auto f = std::make_unique<RawFormula>();
  f->line = t.line;
  f->col = t.col;
  if ((is_ident("false") || is_ident("true") || is_ident("F") || is_ident("T")) && !is_sym("(", 1) &&
      !is_sym("@", 1) && !is_sym("=", 1)) {
    f->kind = (t.text == "true" || t.text == "T") ? RawFormula::Kind::True : RawFormula::Kind::False;
    ++pos_;
    return f;
  }
  if (t.type == Token::Type::Ident && is_sym("(", 1) && !m_.sig.has_function(t.text)) {
    f->kind = RawFormula::Kind::Action;
    f->fact = ident();
    f->args = raw_args();
    expect_sym("@");
    RawTerm time;
    time.kind = RawTerm::Kind::Ident;
    time.line = peek().line;
    time.col = peek().col;
    time.name = ident();
    if (time.name[0] == '#') time.name = time.name.substr(1);
    f->l = time;
    return f;
  }
  RawTerm l = raw_term();
  if (l.kind == RawTerm::Kind::Ident && l.name[0] == '#') l.name = l.name.substr(1);
  if (is_sym("<")) {
    ++pos_;
    f->kind = RawFormula::Kind::Less;
  } else if (is_sym("=")) {
    ++pos_;
    f->kind = RawFormula::Kind::Eq;
  } else {
    fail("expected '=' or '<' in formula");
  }
  RawTerm r = raw_term();
  if (r.kind == RawTerm::Kind::Ident && r.name[0] == '#') r.name = r.name.substr(1);
  f->l = l;
  f->r = r;
  return f;
}

namespace {

// Infers which quantified variables are timepoints: used after '@', in '<',
// or equated with a timepoint.
void collect_temporal(const RawFormula& f, std::set<std::string>& temps) {
  switch (f.kind) {
    case RawFormula::Kind::Action:
      temps.insert(f.l.name);
      break;
    case RawFormula::Kind::Less:
      if (f.l.kind == RawTerm::Kind::Ident) temps.insert(f.l.name);
      if (f.r.kind == RawTerm::Kind::Ident) temps.insert(f.r.name);
      break;
    case RawFormula::Kind::Eq:
      if (f.l.kind == RawTerm::Kind::Ident && f.r.kind == RawTerm::Kind::Ident) {
        if (temps.count(f.l.name)) temps.insert(f.r.name);
        if (temps.count(f.r.name)) temps.insert(f.l.name);
      }
      break;
    default:
      break;
  }
  for (const auto& k : f.kids) collect_temporal(*k, temps);
  for (const auto& [v, s] : f.vars)
    if (s && *s == Sort::Temp) temps.insert(v);
}

}  // namespace

FormulaPtr Parser::build(const RawFormula& f, Scope& sc) {
  auto timepoint = [&](const RawTerm& r) -> Term {
    if (r.kind != RawTerm::Kind::Ident) throw ModelError("expected a timepoint variable", r.line, r.col);
    auto it = sc.formula_vars.find(r.name);
    if (it == sc.formula_vars.end()) throw ModelError("unbound timepoint '" + r.name + "'", r.line, r.col);
    if (it->second.sort() != Sort::Temp)
      throw ModelError("'" + r.name + "' is not a timepoint", r.line, r.col);
    return it->second;
  };
  auto is_temp = [&](const RawTerm& r) {
    if (r.kind != RawTerm::Kind::Ident) return false;
    auto it = sc.formula_vars.find(r.name);
    return it != sc.formula_vars.end() && it->second.sort() == Sort::Temp;
  };
  switch (f.kind) {
    case RawFormula::Kind::False: return fm::falsum();
    case RawFormula::Kind::True: return fm::verum();
    case RawFormula::Kind::Action: {
      std::vector<Term> args;
      for (const auto& a : f.args) {
        Term t = resolve(a, sc, TermMode::Formula);
        args.push_back(t);
      }
      try {
        m_.sig.add_fact(f.fact, args.size());
      } catch (const TermError& e) {
        throw ModelError(e.what(), f.line, f.col);
      }
      return fm::action(f.fact, std::move(args), timepoint(f.l));
    }
    case RawFormula::Kind::Less:
      return fm::less(timepoint(f.l), timepoint(f.r));
    case RawFormula::Kind::Eq:
      if (is_temp(f.l) || is_temp(f.r)) return fm::eq_time(timepoint(f.l), timepoint(f.r));
      return fm::eq_term(resolve(f.l, sc, TermMode::Formula), resolve(f.r, sc, TermMode::Formula));
    case RawFormula::Kind::Not:
      return fm::neg(build(*f.kids[0], sc));
    case RawFormula::Kind::And:
      return fm::conj(build(*f.kids[0], sc), build(*f.kids[1], sc));
    case RawFormula::Kind::Or:
      return fm::disj(build(*f.kids[0], sc), build(*f.kids[1], sc));
    case RawFormula::Kind::Implies:
      return fm::implies(build(*f.kids[0], sc), build(*f.kids[1], sc));
    case RawFormula::Kind::Iff: {
      auto a = build(*f.kids[0], sc);
      auto b = build(*f.kids[1], sc);
      return fm::conj(fm::implies(a, b), fm::implies(b, a));
    }
    case RawFormula::Kind::Exists:
    case RawFormula::Kind::Forall: {
      std::set<std::string> temps;
      collect_temporal(*f.kids[0], temps);
      Scope inner = sc;
      std::vector<Term> vars;
      for (const auto& [name, declared] : f.vars) {
        Sort s = declared ? *declared : (temps.count(name) ? Sort::Temp : Sort::Msg);
        if (!declared && name[0] == '~') s = Sort::Fresh;
        Term v = Term::var(name, s);
        inner.formula_vars[name] = v;
        vars.push_back(v);
      }
      auto body = build(*f.kids[0], inner);
      return f.kind == RawFormula::Kind::Exists ? fm::exists(vars, body) : fm::forall(vars, body);
    }
  }
  return fm::falsum();
}

FormulaPtr Parser::formula(Scope sc) {
  const Token& at = peek();
  auto raw = raw_formula();
  FormulaPtr f = build(*raw, sc);
  if (auto v = unguarded_variable(f, m_.rs))
    fail("message variable '" + *v + "' is not guarded by an action atom", at);
  return f;
}

// ---------------------------------------------------------------- document

void Parser::parse_document() {
  struct Section {
    std::string kind;
    std::size_t begin, end;
    const Token* at;
  };
  std::vector<Section> sections;
  std::size_t i = 0;
  while (toks_[i].type != Token::Type::End) {
    if (!section_start(i)) fail("expected a section keyword", toks_[i]);
    Section s{toks_[i].text, 0, 0, &toks_[i]};
    if (s.kind == "process") {
      ProcDef d;
      d.name = toks_[i + 1].text;
      std::size_t j = i + 2;
      if (toks_[j].type == Token::Type::Sym && toks_[j].text == "(") {
        ++j;
        while (!(toks_[j].type == Token::Type::Sym && toks_[j].text == ")")) {
          if (toks_[j].type == Token::Type::Ident) d.params.push_back(toks_[j].text);
          else if (toks_[j].text != ",") fail("bad parameter list", toks_[j]);
          ++j;
        }
        ++j;
      }
      if (!(toks_[j].type == Token::Type::Sym && toks_[j].text == "=")) fail("expected '='", toks_[j]);
      s.begin = j + 1;
      s.kind = "process:" + d.name;
    } else {
      s.begin = i + 2;
    }
    std::size_t j = s.begin;
    while (toks_[j].type != Token::Type::End && !section_start(j)) ++j;
    s.end = j;
    if (s.kind.rfind("process:", 0) == 0) {
      ProcDef d;
      d.name = s.kind.substr(8);
      std::size_t k = i + 2;
      if (toks_[k].text == "(") {
        ++k;
        while (toks_[k].text != ")") {
          if (toks_[k].type == Token::Type::Ident) d.params.push_back(toks_[k].text);
          ++k;
        }
      }
      d.begin = s.begin;
      d.end = s.end;
      if (defs_.count(d.name)) fail("duplicate process '" + d.name + "'", toks_[i + 1]);
      defs_[d.name] = d;
    }
    sections.push_back(s);
    i = j;
  }

  auto run = [&](const std::string& kind, const std::function<void()>& fn) {
    for (const auto& s : sections) {
      if (s.kind != kind) continue;
      pos_ = s.begin;
      limit_ = s.end;
      fn();
      if (pos_ < s.end) fail("unexpected token");
    }
    limit_ = static_cast<std::size_t>(-1);
  };
  auto seen = [&](const std::string& kind) {
    return std::any_of(sections.begin(), sections.end(), [&](const Section& s) { return s.kind == kind; });
  };

  run("functions", [&] { parse_functions(); });
  run("equations", [&] { parse_equations(); });
  try {
    m_.rs = orient_theory(m_.equations);
  } catch (const TermError& e) {
    throw ModelError(e.what());
  }
  {
    Scope sc;
    auto eq = [](const char* a, const char* b) { return fm::eq_term(Term::var(a), Term::var(b)); };
    auto is_true = [](const char* a) { return fm::eq_term(Term::var(a), Term::app("true", {})); };
    m_.predicates["equal"] = {"equal", {"x1", "x2"}, eq("x1", "x2")};
    m_.predicates["and2"] = {"and2", {"x1", "x2"}, fm::conj_all({is_true("x1"), is_true("x2")})};
    m_.predicates["and3"] = {"and3", {"x1", "x2", "x3"}, fm::conj_all({is_true("x1"), is_true("x2"), is_true("x3")})};
    m_.predicates["and4"] = {
        "and4", {"x1", "x2", "x3", "x4"}, fm::conj_all({is_true("x1"), is_true("x2"), is_true("x3"), is_true("x4")})};
  }
  run("predicates", [&] { parse_predicates(); });
  run("parties", [&] {
    for (auto& p : parse_party_list()) m_.parties.push_back(p);
  });
  run("trusted", [&] {
    for (auto& p : parse_party_list()) {
      if (std::find(m_.parties.begin(), m_.parties.end(), p) == m_.parties.end())
        fail("trusted party '" + p + "' is not declared");
      m_.trusted.insert(p);
    }
  });
  if (m_.parties.empty()) throw ModelError("model declares no parties");
  run("options", [&] { parse_options(); });
  run("bounds", [&] { parse_bounds(); });
  run("relation", [&] { parse_relation(); });
  if (!seen("main")) throw ModelError("model has no main process");
  run("main", [&] {
    m_.main = proc(Scope{});
  });
  for (const auto& p : m_.parties)
    if (!m_.roles.count(p)) m_.roles[p] = Process::tag(p, Process::nil());
  if (!free_vars(m_.main).empty()) throw ModelError("main process is not closed: " + *free_vars(m_.main).begin());
  run("property", [&] {
    std::size_t start = pos_;
    m_.property = formula();
    for (std::size_t k = start; k < pos_; ++k) {
      if (!m_.property_source.empty()) m_.property_source += ' ';
      const auto& t = toks_[k];
      m_.property_source += t.type == Token::Type::Quoted ? "'" + t.text + "'" : t.text;
    }
  });
  if (!m_.property) throw ModelError("model has no property");
  run("verdict", [&] { parse_verdict(); });
  if (m_.verdict.empty()) throw ModelError("model has no verdict cases");
  if (m_.relation.kind == RelationSpec::Kind::Custom) {
    if (m_.relation.lifting.size() != m_.verdict.size())
      throw ModelError("custom lifting matrix must be square over the verdict cases");
    for (const auto& row : m_.relation.lifting)
      if (row.size() != m_.verdict.size())
        throw ModelError("custom lifting matrix must be square over the verdict cases");
  }
  if (m_.options.record_k) m_.sig.add_fact("K", 1);
}

FormulaPtr Parser::formula_only() {
  auto f = formula();
  if (!at_end()) fail("unexpected token after formula");
  return f;
}

Term Parser::term_only() {
  Scope sc;
  Term t = resolve(raw_term(), sc, TermMode::Equation);
  if (!at_end()) fail("unexpected token after term");
  return t;
}

ProcPtr Parser::process_only() {
  ProcPtr p = proc(Scope{});
  if (!at_end()) fail("unexpected token after process");
  if (!free_vars(p).empty()) throw ModelError("process is not closed: " + *free_vars(p).begin());
  return p;
}

void collect_pub(const Term& t, TermSet& out) {
  if (t.kind() == Term::Kind::PubName) out.insert(t);
  for (const auto& a : t.args()) collect_pub(a, out);
}

void collect_pub(const ProcPtr& p, TermSet& out) {
  if (!p) return;
  if (p->kind != Process::Kind::Nil && p->kind != Process::Kind::New) {
    collect_pub(p->t1, out);
    collect_pub(p->t2, out);
  }
  for (const auto& a : p->cond.args) collect_pub(a, out);
  for (const auto& a : p->fact_args) collect_pub(a, out);
  collect_pub(p->p, out);
  collect_pub(p->q, out);
}

}  // namespace

Model parse_model(const std::string& text, const std::string& name) {
  Model m;
  m.name = name;
  Parser p(lex(text), m);
  p.parse_document();
  collect_pub(m.main, m.public_constants);
  m.public_constants.erase(Term());
  return m;
}

FormulaPtr parse_formula(const std::string& text, const Model& m) {
  Model scratch = m;
  Parser p(lex(text), scratch);
  return p.formula_only();
}

Term parse_term(const std::string& text, const Model& m) {
  Model scratch = m;
  Parser p(lex(text), scratch);
  return p.term_only();
}

ProcPtr parse_process(const std::string& text, Model& m) {
  Parser p(lex(text), m);
  return p.process_only();
}

}  // namespace veracct
