#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "averl/averl.hpp"
#include "support/oracles.hpp"

using averl::ApRegistry;
using averl::build_product;
using averl::compile_invariant;
using averl::Mdp;
using averl::parse_invariant;
using averl::ProductMdp;
using averl::SafetyAutomaton;

namespace {

// Two states over {p}: s0 carries p, s1 does not. One action: s0 splits
// 0.5/0.5 between both, s1 returns to s0 deterministically.
Mdp labeled_pair() {
  Mdp m(2, 1);
  m.ap = ApRegistry({"p"});
  m.set_label(0, 1);
  m.set_label(1, 0);
  m.add_transition(0, 0, 0, 0.5, 1.0);
  m.add_transition(0, 0, 1, 0.5, 2.0);
  m.add_transition(1, 0, 0, 1.0, 0.0);
  return m;
}

}  // namespace

TEST_CASE("product of a labeled pair with always-p, expanded by hand") {
  Mdp m = labeled_pair();
  SafetyAutomaton aut = compile_invariant(parse_invariant("G p", m.ap), m.ap);
  ProductMdp p = build_product(m, aut);

  REQUIRE(p.num_mdp_states == 2);
  REQUIRE(p.num_dfa_states == 2);
  REQUIRE(p.num_actions == 1);

  const int v00 = p.state_index(0, 0);  // (s0, safe)
  const int v01 = p.state_index(0, 1);  // (s0, sink)
  const int v10 = p.state_index(1, 0);  // (s1, safe): unreachable label combo
  const int v11 = p.state_index(1, 1);  // (s1, sink)

  // Initial: (s_I, delta(q_I, L(s_I))) = (s0, safe).
  REQUIRE(p.initial == v00);

  // Domain: s1 always maps the automaton to the sink, so (s1, safe) is dead.
  REQUIRE(p.in_domain(v00));
  REQUIRE(p.in_domain(v01));
  REQUIRE_FALSE(p.in_domain(v10));
  REQUIRE(p.in_domain(v11));

  REQUIRE(p.is_accepting(v00));
  REQUIRE_FALSE(p.is_accepting(v01));
  REQUIRE_FALSE(p.is_accepting(v11));

  REQUIRE(p.mdp_state_of(v01) == 0);
  REQUIRE(p.dfa_state_of(v01) == 1);

  // (s0, safe) row: successor s0 keeps the safe component, s1 drops to sink.
  {
    const auto& row = p.row(v00, 0);
    REQUIRE(row.size() == 2);
    double sum = 0.0;
    for (const auto& t : row) {
      sum += t.prob;
      if (t.to == v00) {
        REQUIRE(t.prob == 0.5);
      } else {
        REQUIRE(t.to == v11);
        REQUIRE(t.prob == 0.5);
      }
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }

  // (s0, sink) row mirrors the dynamics inside the sink component.
  {
    const auto& row = p.row(v01, 0);
    REQUIRE(row.size() == 2);
    for (const auto& t : row) REQUIRE((t.to == v01 || t.to == v11));
  }

  // (s1, sink): deterministic return to (s0, sink).
  {
    const auto& row = p.row(v11, 0);
    REQUIRE(row.size() == 1);
    REQUIRE(row[0].to == v01);
    REQUIRE(row[0].prob == 1.0);
  }

  REQUIRE(p.action_available(v00, 0));
  REQUIRE_FALSE(p.action_available(v10, 0));
}

TEST_CASE("product with always-true is isomorphic to the base model") {
  Mdp m = labeled_pair();
  SafetyAutomaton aut = compile_invariant(parse_invariant("G true", m.ap), m.ap);
  ProductMdp p = build_product(m, aut);

  for (int s = 0; s < 2; ++s) {
    int v = p.state_index(s, 0);
    REQUIRE(p.in_domain(v));
    REQUIRE(p.is_accepting(v));
    REQUIRE_FALSE(p.in_domain(p.state_index(s, 1)));  // sink never entered
    const auto& row = p.row(v, 0);
    const auto& base = m.row(s, 0);
    REQUIRE(row.size() == base.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      REQUIRE(p.mdp_state_of(row[i].to) == base[i].to);
      REQUIRE(p.dfa_state_of(row[i].to) == 0);
      REQUIRE(row[i].prob == base[i].prob);
    }
  }
}

TEST_CASE("product rejects mismatched proposition registries") {
  Mdp m = labeled_pair();
  ApRegistry other({"q"});
  SafetyAutomaton aut = compile_invariant(parse_invariant("G q", other), other);
  REQUIRE_THROWS_AS(build_product(m, aut), averl::RegistryMismatchError);

  ApRegistry reordered({"b", "a"});
  Mdp m2(1, 1);
  m2.ap = ApRegistry({"a", "b"});
  m2.add_transition(0, 0, 0, 1.0, 0.0);
  SafetyAutomaton aut2 = compile_invariant(parse_invariant("G a", reordered), reordered);
  REQUIRE_THROWS_AS(build_product(m2, aut2), averl::RegistryMismatchError);
}

TEST_CASE("product rows always sum to one on random instances") {
  averl::Rng rng(7321);
  for (int trial = 0; trial < 40; ++trial) {
    oracle::RandomMdpOpts o;
    o.max_states = 5;
    o.max_actions = 3;
    o.num_props = 2;
    o.random_availability = true;
    Mdp m = oracle::random_communicating_mdp(rng, o);
    SafetyAutomaton aut = oracle::random_automaton(rng, m.ap, 3);
    ProductMdp p = build_product(m, aut);

    REQUIRE(p.in_domain(p.initial));
    REQUIRE(p.mdp_state_of(p.initial) == m.initial_state);

    const int V = p.num_mdp_states * p.num_dfa_states;
    for (int v = 0; v < V; ++v) {
      if (!p.in_domain(v)) continue;
      int s = p.mdp_state_of(v);
      for (int a = 0; a < p.num_actions; ++a) {
        REQUIRE(p.action_available(v, a) == m.action_available(s, a));
        if (!p.action_available(v, a)) continue;
        double sum = 0.0;
        for (const auto& t : p.row(v, a)) {
          sum += t.prob;
          REQUIRE(p.in_domain(t.to));
          // The automaton component of each successor tracks delta on the
          // label of the underlying MDP successor.
          REQUIRE(p.dfa_state_of(t.to) ==
                  aut.step(p.dfa_state_of(v), m.label(p.mdp_state_of(t.to))));
        }
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
      }
    }
  }
}

TEST_CASE("unreachable automaton states never enter the domain") {
  // Three-state automaton whose third state has no incoming transition.
  ApRegistry reg({"p"});
  SafetyAutomaton aut(reg, 3, 0);
  aut.set_accepting(0, true);
  aut.set_accepting(1, false);
  aut.set_accepting(2, true);
  for (averl::Letter l = 0; l < 2; ++l) {
    aut.set_step(0, l, l == 1 ? 0 : 1);
    aut.set_step(1, l, 1);
    aut.set_step(2, l, 2);
  }
  Mdp m = labeled_pair();
  ProductMdp p = build_product(m, aut);
  for (int s = 0; s < 2; ++s) REQUIRE_FALSE(p.in_domain(p.state_index(s, 2)));
}
