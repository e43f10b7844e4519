#ifndef AVERL_AUTOMATON_HPP
#define AVERL_AUTOMATON_HPP

#include <cctype>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "averl/ap.hpp"
#include "averl/common.hpp"

namespace averl {

// ---------------------------------------------------------------------------
// Propositional expressions over an ApRegistry.
// ---------------------------------------------------------------------------

struct PropExpr {
  enum class Kind { True, False, Atom, Not, And, Or };
  Kind kind = Kind::True;
  int atom = -1;                 // Kind::Atom
  std::vector<PropExpr> kids;    // Not: 1 child; And/Or: 2 children

  bool eval(Letter l) const {
    switch (kind) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::Atom: return letter_has(l, atom);
      case Kind::Not: return !kids[0].eval(l);
      case Kind::And: return kids[0].eval(l) && kids[1].eval(l);
      case Kind::Or: return kids[0].eval(l) || kids[1].eval(l);
    }
    return false;
  }

  static PropExpr make_true() { return {}; }
  static PropExpr make_false() { PropExpr e; e.kind = Kind::False; return e; }
  static PropExpr make_atom(int i) {
    PropExpr e; e.kind = Kind::Atom; e.atom = i; return e;
  }
  static PropExpr make_not(PropExpr c) {
    PropExpr e; e.kind = Kind::Not; e.kids.push_back(std::move(c)); return e;
  }
  static PropExpr make_and(PropExpr a, PropExpr b) {
    PropExpr e; e.kind = Kind::And;
    e.kids.push_back(std::move(a)); e.kids.push_back(std::move(b));
    return e;
  }
  static PropExpr make_or(PropExpr a, PropExpr b) {
    PropExpr e; e.kind = Kind::Or;
    e.kids.push_back(std::move(a)); e.kids.push_back(std::move(b));
    return e;
  }
};

// An invariant property: "always body". The only temporal operator we compile
// natively; richer safety properties come in as explicit DFA files.
struct InvariantFormula {
  PropExpr body;
};

// Recursive-descent parser for propositional expressions.
// Grammar:  expr := term ('|' term)* ; term := factor ('&' factor)* ;
//           factor := '!' factor | '(' expr ')' | 'true' | 'false' | atom
namespace detail {

class PropParser {
 public:
  PropParser(const std::string& text, const ApRegistry& registry)
      : text_(text), registry_(registry) {}

  PropExpr parse() {
    PropExpr e = parse_or();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected text at position " + std::to_string(pos_) +
                       ": '" + text_.substr(pos_) + "'");
    return e;
  }

 private:
  PropExpr parse_or() {
    PropExpr e = parse_and();
    while (peek() == '|') {
      ++pos_;
      e = PropExpr::make_or(std::move(e), parse_and());
    }
    return e;
  }

  PropExpr parse_and() {
    PropExpr e = parse_factor();
    while (peek() == '&') {
      ++pos_;
      e = PropExpr::make_and(std::move(e), parse_factor());
    }
    return e;
  }

  PropExpr parse_factor() {
    char c = peek();
    if (c == '!') {
      ++pos_;
      return PropExpr::make_not(parse_factor());
    }
    if (c == '(') {
      ++pos_;
      PropExpr e = parse_or();
      if (peek() != ')') throw ParseError("missing ')' in expression: " + text_);
      ++pos_;
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        word += text_[pos_++];
      if (word == "true") return PropExpr::make_true();
      if (word == "false") return PropExpr::make_false();
      return PropExpr::make_atom(registry_.index(word));
    }
    throw ParseError("expected proposition, 'true', 'false', '!' or '(' in: " + text_);
  }

  // Returns the next non-space character without consuming it, or '\0' at end.
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  const ApRegistry& registry_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PropExpr parse_prop_expr(const std::string& text, const ApRegistry& registry) {
  return detail::PropParser(text, registry).parse();
}

// Parses "G <prop-expr>". The leading G (globally) is mandatory; everything
// after it is a propositional body.
inline InvariantFormula parse_invariant(const std::string& text,
                                        const ApRegistry& registry) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i >= text.size() || text[i] != 'G')
    throw ParseError("invariant formula must start with 'G': " + text);
  ++i;
  if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
      text[i] != '(' && text[i] != '!')
    throw ParseError("invariant formula must start with 'G': " + text);
  return InvariantFormula{parse_prop_expr(text.substr(i), registry)};
}

// ---------------------------------------------------------------------------
// Safety DFA.
// ---------------------------------------------------------------------------

// Deterministic automaton over 2^AP with a safety acceptance condition: a
// label sequence is accepted iff the run never leaves the accepting set.
// The transition table is dense (state * 2^|AP| + letter), hence total by
// construction; loaders must fill every entry.
class SafetyAutomaton {
 public:
  SafetyAutomaton() = default;
  SafetyAutomaton(ApRegistry registry, int num_states, int initial)
      : ap(std::move(registry)),
        initial_(initial),
        accepting_(num_states, 0),
        delta_(static_cast<std::size_t>(num_states) * ap.alphabet_size(), -1) {}

  ApRegistry ap;

  int num_states() const { return static_cast<int>(accepting_.size()); }
  int initial() const { return initial_; }

  bool is_accepting(int q) const { return accepting_[q] != 0; }
  void set_accepting(int q, bool acc) { accepting_[q] = acc ? 1 : 0; }

  int step(int q, Letter l) const {
    return delta_[static_cast<std::size_t>(q) * ap.alphabet_size() + l];
  }
  void set_step(int q, Letter l, int to) {
    delta_[static_cast<std::size_t>(q) * ap.alphabet_size() + l] = to;
  }

  std::vector<std::string> state_names;  // optional, for file round-trips

  std::string state_name(int q) const {
    return q < static_cast<int>(state_names.size()) ? state_names[q]
                                                    : "q" + std::to_string(q);
  }

  // Throws unless delta is filled for every (state, letter).
  void check_total() const {
    for (int q = 0; q < num_states(); ++q)
      for (Letter l = 0; l < ap.alphabet_size(); ++l)
        if (step(q, l) < 0 || step(q, l) >= num_states())
          throw NonTotalTransitionError(
              "missing transition from state " + std::to_string(q) +
              " on letter " + std::to_string(l));
  }

 private:
  int initial_ = 0;
  std::vector<char> accepting_;
  std::vector<int> delta_;
};

struct DfaRunResult {
  int final_state;
  bool accepted;
};

// Runs the automaton over a word. Accepted iff every visited state, the
// initial one included, is accepting; for safety automata rejection is
// permanent, but this checks the whole visit set so it is also correct on
// hand-written DFAs whose accepting set is not absorbing-complement.
inline DfaRunResult dfa_run(const SafetyAutomaton& aut, const std::vector<Letter>& word) {
  int q = aut.initial();
  bool ok = aut.is_accepting(q);
  for (Letter l : word) {
    if (l >= aut.ap.alphabet_size())
      throw ConfigError("letter outside the registry alphabet");
    q = aut.step(q, l);
    ok = ok && aut.is_accepting(q);
  }
  return {q, ok};
}

// Canonical 2-state automaton for an invariant formula: state 0 is safe and
// accepting, state 1 is an absorbing sink. If the body is a tautology the sink
// is simply unreachable and every run is accepted.
inline SafetyAutomaton compile_invariant(const InvariantFormula& formula,
                                         const ApRegistry& registry) {
  SafetyAutomaton aut(registry, 2, 0);
  aut.set_accepting(0, true);
  aut.set_accepting(1, false);
  aut.state_names = {"safe", "sink"};
  for (Letter l = 0; l < registry.alphabet_size(); ++l) {
    aut.set_step(0, l, formula.body.eval(l) ? 0 : 1);
    aut.set_step(1, l, 1);
  }
  return aut;
}

}  // namespace averl

#endif  // AVERL_AUTOMATON_HPP
