#ifndef AVERL_MDP_HPP
#define AVERL_MDP_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "averl/ap.hpp"
#include "averl/common.hpp"

namespace averl {

struct Transition {
  int to;
  double prob;
  double reward;
};

// Grid coordinate attached to a state, used by distance-based potential specs.
struct Coord {
  int row = 0;
  int col = 0;
};

inline int manhattan(const Coord& a, const Coord& b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

// Finite labeled MDP with sparse transitions. An action is available at a state
// iff its row is nonempty; rewards live on transitions R(s, a, s').
class Mdp {
 public:
  Mdp() = default;
  Mdp(int num_states, int num_actions)
      : num_states_(num_states),
        num_actions_(num_actions),
        labels_(num_states, 0),
        rows_(static_cast<std::size_t>(num_states) * num_actions) {}

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  ApRegistry ap;
  std::vector<std::string> state_names;   // optional; empty means "s<i>"
  std::vector<std::string> action_names;  // optional; empty means "a<i>"
  int initial_state = 0;

  Letter label(int s) const { return labels_[s]; }
  void set_label(int s, Letter l) { labels_[s] = l; }

  // Optional per-state coordinates (set by grid-based environments and loaders).
  std::vector<Coord> coords;
  bool has_coords() const { return !coords.empty(); }

  const std::vector<Transition>& row(int s, int a) const {
    return rows_[static_cast<std::size_t>(s) * num_actions_ + a];
  }

  bool action_available(int s, int a) const { return !row(s, a).empty(); }

  std::vector<int> available_actions(int s) const {
    std::vector<int> out;
    for (int a = 0; a < num_actions_; ++a)
      if (action_available(s, a)) out.push_back(a);
    return out;
  }

  // Adds probability mass to (s, a) -> to. Mass on an existing successor is
  // merged; the reward of the first insertion wins, and merging transitions
  // that disagree on reward is a modeling error.
  void add_transition(int s, int a, int to, double prob, double reward) {
    auto& r = rows_[static_cast<std::size_t>(s) * num_actions_ + a];
    for (auto& t : r) {
      if (t.to == to) {
        if (t.reward != reward)
          throw ConfigError("conflicting rewards on duplicate successor");
        t.prob += prob;
        return;
      }
    }
    r.push_back({to, prob, reward});
  }

  void set_row(int s, int a, std::vector<Transition> transitions) {
    rows_[static_cast<std::size_t>(s) * num_actions_ + a] = std::move(transitions);
  }

  std::string state_name(int s) const {
    return s < static_cast<int>(state_names.size()) ? state_names[s]
                                                    : "s" + std::to_string(s);
  }
  std::string action_name(int a) const {
    return a < static_cast<int>(action_names.size()) ? action_names[a]
                                                     : "a" + std::to_string(a);
  }

  // Expected one-step reward r̄(s, a).
  double expected_reward(int s, int a) const {
    double r = 0.0;
    for (const auto& t : row(s, a)) r += t.prob * t.reward;
    return r;
  }

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<Letter> labels_;
  std::vector<std::vector<Transition>> rows_;
};

// A deterministic stationary policy; action[s] < 0 marks "unset" and is invalid.
struct StationaryPolicy {
  std::vector<int> action;

  int operator[](int s) const { return action[s]; }
  int num_states() const { return static_cast<int>(action.size()); }
};

constexpr double kRowSumTolerance = 1e-12;

// Structural validation. Returns human-readable problems; empty means valid.
// Checked: every state has at least one available action, rows sum to 1 within
// kRowSumTolerance, probabilities are in (0, 1], targets are in range, rewards
// are finite, labels use only registered propositions, initial state in range.
inline std::vector<std::string> validate(const Mdp& m) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  if (m.num_states() <= 0) complain("MDP has no states");
  if (m.num_actions() <= 0) complain("MDP has no actions");
  if (m.initial_state < 0 || m.initial_state >= m.num_states())
    complain("initial state out of range");

  const Letter valid_mask =
      m.ap.size() >= 32 ? ~Letter{0} : (Letter{1} << m.ap.size()) - 1;

  for (int s = 0; s < m.num_states(); ++s) {
    if (m.label(s) & ~valid_mask)
      complain("state " + m.state_name(s) + " labeled with unregistered proposition bits");
    bool any_action = false;
    for (int a = 0; a < m.num_actions(); ++a) {
      const auto& row = m.row(s, a);
      if (row.empty()) continue;
      any_action = true;
      double sum = 0.0;
      for (const auto& t : row) {
        if (t.to < 0 || t.to >= m.num_states())
          complain("transition from " + m.state_name(s) + "/" + m.action_name(a) +
                   " targets out-of-range state");
        if (!(t.prob > 0.0) || t.prob > 1.0 + kRowSumTolerance)
          complain("transition from " + m.state_name(s) + "/" + m.action_name(a) +
                   " has probability outside (0, 1]");
        if (!std::isfinite(t.reward))
          complain("non-finite reward on " + m.state_name(s) + "/" + m.action_name(a));
        sum += t.prob;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        complain("row " + m.state_name(s) + "/" + m.action_name(a) +
                 " sums to " + std::to_string(sum));
    }
    if (!any_action)
      complain("state " + m.state_name(s) + " has no available action");
  }
  return problems;
}

inline void validate_or_throw(const Mdp& m) {
  auto problems = validate(m);
  if (!problems.empty()) {
    std::string msg = "invalid MDP:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

inline void check_policy(const Mdp& m, const StationaryPolicy& pi) {
  if (pi.num_states() != m.num_states())
    throw ConfigError("policy size does not match MDP");
  for (int s = 0; s < m.num_states(); ++s)
    if (pi[s] < 0 || pi[s] >= m.num_actions() || !m.action_available(s, pi[s]))
      throw ConfigError("policy picks unavailable action at state " + m.state_name(s));
}

}  // namespace averl

#endif  // AVERL_MDP_HPP
