#ifndef AVERL_PRODUCT_HPP
#define AVERL_PRODUCT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "averl/automaton.hpp"
#include "averl/common.hpp"
#include "averl/mdp.hpp"

namespace averl {

struct ProductTransition {
  int to;       // product state index
  double prob;
};

// Synchronous product of an MDP and a safety DFA. Joint state v = (s, q) with
// dense index s * |Q| + q; the automaton tracks the labels of the states the
// MDP *enters*, so the initial product state already consumed L(s_I).
//
// The domain is not all of S x Q and not just the part reachable from the
// initial state. A pair (s, q) is in the domain iff q = delta(q0, L(s)) for
// some automaton state q0 reachable from q_I: exactly the pairs some
// trajectory could occupy. Reachability from v_I alone would erase advice
// regions the agent starts outside of (a robot beginning in the corridor
// still needs the in-kitchen winning pairs), while the full grid would admit
// pairs no run can ever be in, inflating the projected region.
class ProductMdp {
 public:
  ProductMdp() = default;

  int num_mdp_states = 0;
  int num_dfa_states = 0;
  int num_actions = 0;
  int initial = 0;

  int num_states() const { return num_mdp_states * num_dfa_states; }
  int state_index(int s, int q) const { return s * num_dfa_states + q; }
  int mdp_state_of(int v) const { return v / num_dfa_states; }
  int dfa_state_of(int v) const { return v % num_dfa_states; }

  bool in_domain(int v) const { return live_[v] != 0; }
  bool is_accepting(int v) const { return accepting_[v] != 0; }

  const std::vector<ProductTransition>& row(int v, int a) const {
    return rows_[static_cast<std::size_t>(v) * num_actions + a];
  }
  bool action_available(int v, int a) const { return !row(v, a).empty(); }

  friend ProductMdp build_product(const Mdp& m, const SafetyAutomaton& aut);

 private:
  std::vector<char> live_;                            // v in domain
  std::vector<char> accepting_;                       // v in H-bar (q in H)
  std::vector<std::vector<ProductTransition>> rows_;  // v * A + a, domain states only
};

inline ProductMdp build_product(const Mdp& m, const SafetyAutomaton& aut) {
  if (m.ap != aut.ap)
    throw RegistryMismatchError(
        "MDP and automaton use different atomic-proposition registries");

  ProductMdp p;
  p.num_mdp_states = m.num_states();
  p.num_dfa_states = aut.num_states();
  p.num_actions = m.num_actions();
  p.initial = p.state_index(m.initial_state, aut.step(aut.initial(), m.label(m.initial_state)));

  // Automaton states reachable from q_I over any word.
  std::vector<char> q_reach(aut.num_states(), 0);
  std::vector<int> stack = {aut.initial()};
  q_reach[aut.initial()] = 1;
  while (!stack.empty()) {
    int q = stack.back();
    stack.pop_back();
    for (Letter l = 0; l < aut.ap.alphabet_size(); ++l) {
      int q2 = aut.step(q, l);
      if (!q_reach[q2]) { q_reach[q2] = 1; stack.push_back(q2); }
    }
  }

  const int nv = p.num_states();
  p.live_.assign(nv, 0);
  p.accepting_.assign(nv, 0);
  for (int s = 0; s < m.num_states(); ++s)
    for (int q = 0; q < aut.num_states(); ++q) {
      if (q_reach[q]) p.live_[p.state_index(s, aut.step(q, m.label(s)))] = 1;
      p.accepting_[p.state_index(s, q)] = aut.is_accepting(q) ? 1 : 0;
    }

  // Each MDP successor s' maps to exactly one automaton successor
  // delta(q, L(s')), so product rows inherit the MDP's row sums unchanged;
  // successors of domain states are again domain states.
  p.rows_.resize(static_cast<std::size_t>(nv) * p.num_actions);
  for (int s = 0; s < m.num_states(); ++s)
    for (int q = 0; q < aut.num_states(); ++q) {
      const int v = p.state_index(s, q);
      if (!p.live_[v]) continue;
      for (int a = 0; a < m.num_actions(); ++a) {
        const auto& row = m.row(s, a);
        if (row.empty()) continue;
        auto& prow = p.rows_[static_cast<std::size_t>(v) * p.num_actions + a];
        prow.reserve(row.size());
        for (const auto& t : row)
          prow.push_back({p.state_index(t.to, aut.step(q, m.label(t.to))), t.prob});
      }
    }
  return p;
}

}  // namespace averl

#endif  // AVERL_PRODUCT_HPP
