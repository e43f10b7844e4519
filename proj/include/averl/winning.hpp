#ifndef AVERL_WINNING_HPP
#define AVERL_WINNING_HPP

#include <cstdint>
#include <vector>

#include "averl/common.hpp"
#include "averl/product.hpp"

namespace averl {

// Almost-sure winning region of a product MDP: the state-action pairs from
// which the run can be kept inside the accepting set with probability 1,
// projected down to MDP-level (s, a) pairs.
struct WinningRegion {
  int num_states = 0;        // MDP-level
  int num_actions = 0;
  std::vector<char> member;  // s * A + a

  int num_product_states = 0;
  std::vector<char> product_member;  // v * A + a, the fixpoint W0 before projection

  bool contains(int s, int a) const {
    return member[static_cast<std::size_t>(s) * num_actions + a] != 0;
  }
  bool product_contains(int v, int a) const {
    return product_member[static_cast<std::size_t>(v) * num_actions + a] != 0;
  }
  long long count() const {
    long long n = 0;
    for (char c : member) n += c;
    return n;
  }
  bool empty() const { return count() == 0; }
};

// Greatest-fixpoint removal loop: a pair (v, a) survives iff v is accepting
// and every positive-probability successor is itself a surviving state (one
// with at least one surviving action), i.e. the probability of leaving the
// accepting set is 0 under the surviving pairs. Implemented as a worklist over
// the reversed product graph: when a state loses its last action, every pair
// that can reach it gets removed, O(|V|*|A| + edges) total.
inline WinningRegion almost_sure_region(const ProductMdp& prod) {
  const int nv = prod.num_states();
  const int na = prod.num_actions;

  std::vector<char> pair_removed(static_cast<std::size_t>(nv) * na, 0);
  std::vector<int> live_actions(nv, 0);
  std::vector<char> state_dead(nv, 0);

  // Reverse adjacency: for each product state u, the pairs (v, a) with u among
  // their successors. Built only for accepting v; pairs of non-accepting
  // states are dead on arrival and never need re-examination.
  std::vector<std::vector<std::pair<int, int>>> preds(nv);
  std::vector<int> worklist;

  for (int v = 0; v < nv; ++v) {
    if (!prod.in_domain(v)) {
      // Outside the product's domain: no trajectory can occupy v, so it plays
      // no role; domain states never list it as a successor.
      state_dead[v] = 1;
      for (int a = 0; a < na; ++a)
        pair_removed[static_cast<std::size_t>(v) * na + a] = 1;
      continue;
    }
    if (!prod.is_accepting(v)) {
      state_dead[v] = 1;
      worklist.push_back(v);
      for (int a = 0; a < na; ++a)
        pair_removed[static_cast<std::size_t>(v) * na + a] = 1;
      continue;
    }
    for (int a = 0; a < na; ++a) {
      if (!prod.action_available(v, a)) {
        pair_removed[static_cast<std::size_t>(v) * na + a] = 1;
        continue;
      }
      ++live_actions[v];
      for (const auto& t : prod.row(v, a)) preds[t.to].emplace_back(v, a);
    }
    if (live_actions[v] == 0) {  // no available action at all
      state_dead[v] = 1;
      worklist.push_back(v);
    }
  }

  while (!worklist.empty()) {
    int u = worklist.back();
    worklist.pop_back();
    for (const auto& [v, a] : preds[u]) {
      auto& removed = pair_removed[static_cast<std::size_t>(v) * na + a];
      if (removed) continue;
      removed = 1;
      if (--live_actions[v] == 0 && !state_dead[v]) {
        state_dead[v] = 1;
        worklist.push_back(v);
      }
    }
  }

  WinningRegion region;
  region.num_states = prod.num_mdp_states;
  region.num_actions = na;
  region.num_product_states = nv;
  region.product_member.assign(static_cast<std::size_t>(nv) * na, 0);
  region.member.assign(static_cast<std::size_t>(prod.num_mdp_states) * na, 0);
  for (int v = 0; v < nv; ++v)
    for (int a = 0; a < na; ++a)
      if (!pair_removed[static_cast<std::size_t>(v) * na + a]) {
        region.product_member[static_cast<std::size_t>(v) * na + a] = 1;
        region.member[static_cast<std::size_t>(prod.mdp_state_of(v)) * na + a] = 1;
      }
  return region;
}

}  // namespace averl

#endif  // AVERL_WINNING_HPP
