#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "averl/averl.hpp"

using averl::ApRegistry;
using averl::compile_invariant;
using averl::dfa_run;
using averl::InvariantFormula;
using averl::Letter;
using averl::parse_invariant;
using averl::parse_prop_expr;
using averl::ParseError;
using averl::PropExpr;
using averl::SafetyAutomaton;
using averl::UnknownAtomError;

namespace {

// Truth vector of an expression over the full alphabet.
std::vector<bool> truth(const PropExpr& e, const ApRegistry& reg) {
  std::vector<bool> out;
  for (Letter l = 0; l < reg.alphabet_size(); ++l) out.push_back(e.eval(l));
  return out;
}

// Builds a propositional formula realizing an arbitrary truth table as a
// disjunction of minterms; exercises the parser on every shape.
std::string minterm_formula(const ApRegistry& reg, unsigned table) {
  std::string out;
  for (Letter l = 0; l < reg.alphabet_size(); ++l) {
    if (!(table & (1u << l))) continue;
    std::string conj;
    for (std::size_t i = 0; i < reg.size(); ++i) {
      if (!conj.empty()) conj += " & ";
      conj += averl::letter_has(l, static_cast<int>(i)) ? reg.name(i) : "!" + reg.name(i);
    }
    if (conj.empty()) conj = "true";
    if (!out.empty()) out += " | ";
    out += "(" + conj + ")";
  }
  return out.empty() ? "false" : out;
}

}  // namespace

TEST_CASE("registry letters round-trip through proposition sets") {
  ApRegistry reg({"a", "b", "c"});
  REQUIRE(reg.size() == 3);
  REQUIRE(reg.alphabet_size() == 8);
  REQUIRE(reg.index("b") == 1);
  REQUIRE(reg.contains("c"));
  REQUIRE_FALSE(reg.contains("z"));
  Letter l = reg.letter({"a", "c"});
  REQUIRE(l == 0b101);
  REQUIRE(reg.props_of(l) == std::vector<std::string>{"a", "c"});
  REQUIRE_THROWS_AS(reg.index("nope"), UnknownAtomError);
}

TEST_CASE("registry rejects duplicates and oversized sets") {
  REQUIRE_THROWS_AS(ApRegistry({"a", "a"}), averl::ConfigError);
  std::vector<std::string> too_many;
  for (int i = 0; i < 21; ++i) too_many.push_back("p" + std::to_string(i));
  REQUIRE_THROWS_AS(ApRegistry(too_many), averl::ConfigError);
}

TEST_CASE("parser precedence: and binds tighter than or") {
  ApRegistry reg({"a", "b", "c"});
  PropExpr e = parse_prop_expr("a | b & c", reg);
  // a=0: true only when b and c both hold.
  REQUIRE_FALSE(e.eval(reg.letter({"b"})));
  REQUIRE(e.eval(reg.letter({"b", "c"})));
  REQUIRE(e.eval(reg.letter({"a"})));

  PropExpr f = parse_prop_expr("(a | b) & c", reg);
  REQUIRE_FALSE(f.eval(reg.letter({"a"})));
  REQUIRE(f.eval(reg.letter({"a", "c"})));
}

TEST_CASE("parser handles negation, parentheses, and constants") {
  ApRegistry reg({"a", "b"});
  REQUIRE(truth(parse_prop_expr("!a", reg), reg) ==
          std::vector<bool>{true, false, true, false});
  REQUIRE(truth(parse_prop_expr("!!a", reg), reg) ==
          std::vector<bool>{false, true, false, true});
  REQUIRE(truth(parse_prop_expr("true", reg), reg) ==
          std::vector<bool>{true, true, true, true});
  REQUIRE(truth(parse_prop_expr("false | a", reg), reg) ==
          std::vector<bool>{false, true, false, true});
  REQUIRE(truth(parse_prop_expr("!(a & b)", reg), reg) ==
          std::vector<bool>{true, true, true, false});
}

TEST_CASE("parser rejects malformed input") {
  ApRegistry reg({"a", "b"});
  REQUIRE_THROWS_AS(parse_prop_expr("a |", reg), ParseError);
  REQUIRE_THROWS_AS(parse_prop_expr("(a", reg), ParseError);
  REQUIRE_THROWS_AS(parse_prop_expr("a b", reg), ParseError);
  REQUIRE_THROWS_AS(parse_prop_expr("", reg), ParseError);
  REQUIRE_THROWS_AS(parse_prop_expr("&", reg), ParseError);
  REQUIRE_THROWS_AS(parse_prop_expr("zoo", reg), UnknownAtomError);
}

TEST_CASE("invariant parsing demands the leading G") {
  ApRegistry reg({"kitchen"});
  REQUIRE_NOTHROW(parse_invariant("G kitchen", reg));
  REQUIRE_NOTHROW(parse_invariant("  G (kitchen)", reg));
  REQUIRE_THROWS_WITH(parse_invariant("kitchen", reg),
                      Catch::Matchers::ContainsSubstring("must start with 'G'"));
  REQUIRE_THROWS_AS(parse_invariant("Gkitchen", reg), ParseError);
  REQUIRE_THROWS_AS(parse_invariant("F kitchen", reg), ParseError);
}

TEST_CASE("compiled invariant of a tautology accepts everything") {
  ApRegistry reg({"p"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G true", reg), reg);
  REQUIRE(aut.num_states() == 2);
  REQUIRE(aut.initial() == 0);
  REQUIRE(aut.is_accepting(0));
  REQUIRE_FALSE(aut.is_accepting(1));
  REQUIRE(aut.state_name(0) == "safe");
  REQUIRE(aut.state_name(1) == "sink");
  for (Letter l = 0; l < 2; ++l) REQUIRE(aut.step(0, l) == 0);
  REQUIRE(dfa_run(aut, {0, 1, 0, 1}).accepted);
}

TEST_CASE("always human_visible drops to the sink on one dark step") {
  ApRegistry reg({"human_visible"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G human_visible", reg), reg);
  Letter hv = reg.letter({"human_visible"}), dark = 0;

  REQUIRE(dfa_run(aut, {hv, hv, hv}).accepted);
  auto r = dfa_run(aut, {hv, dark, hv});
  REQUIRE_FALSE(r.accepted);
  REQUIRE(r.final_state == 1);
  // Sink is absorbing: every extension stays rejected.
  REQUIRE_FALSE(dfa_run(aut, {hv, dark, hv, hv, hv, hv}).accepted);
  REQUIRE(aut.step(1, hv) == 1);
  REQUIRE(aut.step(1, dark) == 1);
}

TEST_CASE("always (kitchen and not wet) evaluates the body per letter") {
  ApRegistry reg({"kitchen", "wet"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G (kitchen & !wet)", reg), reg);
  Letter k = reg.letter({"kitchen"});
  Letter kw = reg.letter({"kitchen", "wet"});
  REQUIRE(aut.step(0, k) == 0);
  REQUIRE(aut.step(0, kw) == 1);
  REQUIRE(aut.step(0, 0) == 1);
  REQUIRE(dfa_run(aut, {k, k, k}).accepted);
  REQUIRE_FALSE(dfa_run(aut, {k, kw}).accepted);
}

TEST_CASE("empty word is accepted by invariant automata") {
  ApRegistry reg({"p"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G p", reg), reg);
  REQUIRE(dfa_run(aut, {}).accepted);
  REQUIRE(dfa_run(aut, {}).final_state == 0);
}

TEST_CASE("acceptance counts every visited state, not just the last") {
  // Hand automaton: accepting initial, non-accepting middle, accepting third.
  ApRegistry reg({"p"});
  SafetyAutomaton aut(reg, 3, 0);
  aut.set_accepting(0, true);
  aut.set_accepting(1, false);
  aut.set_accepting(2, true);
  for (Letter l = 0; l < 2; ++l) {
    aut.set_step(0, l, 1);
    aut.set_step(1, l, 2);
    aut.set_step(2, l, 2);
  }
  auto r = dfa_run(aut, {0, 0});
  REQUIRE(r.final_state == 2);
  REQUIRE_FALSE(r.accepted);  // passed through the non-accepting middle
}

TEST_CASE("letters outside the alphabet are rejected") {
  ApRegistry reg({"p"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G p", reg), reg);
  REQUIRE_THROWS_AS(dfa_run(aut, {7}), averl::ConfigError);
}

TEST_CASE("check_total flags missing rows") {
  ApRegistry reg({"p"});
  SafetyAutomaton aut(reg, 2, 0);
  aut.set_accepting(0, true);
  aut.set_step(0, 0, 0);
  aut.set_step(0, 1, 1);
  aut.set_step(1, 0, 1);  // (1, letter 1) left unset
  REQUIRE_THROWS_AS(aut.check_total(), averl::NonTotalTransitionError);
  aut.set_step(1, 1, 1);
  REQUIRE_NOTHROW(aut.check_total());
}

TEST_CASE("acceptance equals pointwise invariance, exhaustively") {
  // Every boolean body over <= 2 propositions, every word up to length 6;
  // for 3 propositions every body on words up to length 4 plus a sampled set
  // of longer words. dfa_run must accept exactly the pointwise-safe words.
  for (int k = 1; k <= 3; ++k) {
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back("p" + std::to_string(i));
    ApRegistry reg(names);
    const unsigned letters = 1u << k;
    const unsigned tables = 1u << letters;
    const int max_len = k == 3 ? 4 : 6;
    for (unsigned table = 0; table < tables; ++table) {
      PropExpr body = parse_prop_expr(minterm_formula(reg, table), reg);
      // The parsed minterm formula realizes exactly the requested table.
      for (Letter l = 0; l < letters; ++l)
        REQUIRE(body.eval(l) == ((table >> l & 1u) != 0));
      SafetyAutomaton aut = compile_invariant(InvariantFormula{body}, reg);
      for (int len = 0; len <= max_len; ++len) {
        std::vector<Letter> word(len, 0);
        while (true) {
          bool pointwise = true;
          for (Letter l : word) pointwise = pointwise && ((table >> l & 1u) != 0);
          if (dfa_run(aut, word).accepted != pointwise) {
            CAPTURE(k, table, word);
            REQUIRE(dfa_run(aut, word).accepted == pointwise);
          }
          int i = 0;
          while (i < len && ++word[i] == letters) word[i++] = 0;
          if (i == len) break;
        }
      }
    }
  }
}

TEST_CASE("longer random words over 3 propositions still match invariance") {
  ApRegistry reg({"p0", "p1", "p2"});
  averl::Rng rng(606);
  for (int trial = 0; trial < 16; ++trial) {
    unsigned table = static_cast<unsigned>(rng.next_u64() & 0xFF);
    PropExpr body = parse_prop_expr(minterm_formula(reg, table), reg);
    SafetyAutomaton aut = compile_invariant(InvariantFormula{body}, reg);
    for (int w = 0; w < 400; ++w) {
      int len = rng.uniform_int(7);
      std::vector<Letter> word;
      for (int i = 0; i < len; ++i) word.push_back(static_cast<Letter>(rng.uniform_int(8)));
      bool pointwise = true;
      for (Letter l : word) pointwise = pointwise && ((table >> l & 1u) != 0);
      REQUIRE(dfa_run(aut, word).accepted == pointwise);
    }
  }
}
