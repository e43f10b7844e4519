#ifndef AVERL_ENV_GRIDWORLD_HPP
#define AVERL_ENV_GRIDWORLD_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "averl/common.hpp"
#include "averl/env/env.hpp"
#include "averl/mdp.hpp"

namespace averl {

// 6x6 continuing gridworld. One green cell pays +100 and teleports the agent
// to a uniformly random cell; so does failing to reach it within the step
// budget. The optional wall fills row 2, columns 2..5, which traps
// down/right-only movement in the region above it.
struct GridworldConfig {
  int width = 6;
  int height = 6;
  Coord start{0, 0};
  Coord green{5, 5};
  bool wall = false;
  int step_budget = 100;
  double green_reward = 100.0;

  std::vector<Coord> wall_cells() const {
    if (!wall) return {};
    std::vector<Coord> cells;
    for (int c = 2; c <= 5; ++c) cells.push_back({2, c});
    return cells;
  }
};

// Actions in fixed order; the reference advice permits only Down and Right.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

class GridworldEnv : public Env {
 public:
  explicit GridworldEnv(GridworldConfig cfg = {}) : cfg_(cfg) {
    const int n = cfg_.width * cfg_.height;
    wall_.assign(n, 0);
    for (const auto& w : cfg_.wall_cells()) wall_[cell_index(w)] = 1;
    if (wall_[cell_index(cfg_.start)] || wall_[cell_index(cfg_.green)])
      throw ConfigError("start or green cell inside the wall");

    // Teleports land anywhere except walls and the green cell itself; landing
    // on green would pay out without an action. Degenerate boards where no
    // such cell exists (1x1) fall back to all non-wall cells.
    for (int i = 0; i < n; ++i)
      if (!wall_[i] && i != cell_index(cfg_.green)) teleport_targets_.push_back(i);
    if (teleport_targets_.empty())
      for (int i = 0; i < n; ++i)
        if (!wall_[i]) teleport_targets_.push_back(i);

    all_actions_ = {kUp, kDown, kLeft, kRight};
    pos_ = cell_index(cfg_.start);
    counter_ = 0;
  }

  int num_states() const override { return cfg_.width * cfg_.height; }
  int num_actions() const override { return 4; }
  const std::vector<int>& available_actions(int) const override { return all_actions_; }
  const ApRegistry& ap() const override { return ap_; }

  void reset(Rng&) override {
    pos_ = cell_index(cfg_.start);
    counter_ = 0;
  }

  int state() const override { return pos_; }

  StepResult step(int action, Rng& rng) override {
    int target = move_target(pos_, action);
    double reward = 0.0;
    if (target == cell_index(cfg_.green)) {
      reward = cfg_.green_reward;
      pos_ = teleport_targets_[rng.uniform_int(static_cast<int>(teleport_targets_.size()))];
      counter_ = 0;
    } else {
      pos_ = target;
      if (++counter_ >= cfg_.step_budget) {
        pos_ = teleport_targets_[rng.uniform_int(static_cast<int>(teleport_targets_.size()))];
        counter_ = 0;
      }
    }
    return {pos_, reward, 0};
  }

  const GridworldConfig& config() const { return cfg_; }
  int cell_index(const Coord& c) const { return c.row * cfg_.width + c.col; }
  Coord coord(int idx) const { return {idx / cfg_.width, idx % cfg_.width}; }
  bool is_wall(int idx) const { return wall_[idx] != 0; }
  const std::vector<int>& teleport_targets() const { return teleport_targets_; }

  // Budget counter since the last teleport; exposed (with set_state) so tests
  // can pin the full internal state when checking transition distributions.
  int counter() const { return counter_; }
  void set_state(int pos, int counter) {
    pos_ = pos;
    counter_ = counter;
  }

  // Moving off-grid or into a wall keeps the agent in place.
  int move_target(int from, int action) const {
    Coord c = coord(from);
    switch (action) {
      case kUp: --c.row; break;
      case kDown: ++c.row; break;
      case kLeft: --c.col; break;
      case kRight: ++c.col; break;
      default: throw ConfigError("bad gridworld action " + std::to_string(action));
    }
    if (c.row < 0 || c.row >= cfg_.height || c.col < 0 || c.col >= cfg_.width)
      return from;
    int idx = cell_index(c);
    return wall_[idx] ? from : idx;
  }

 private:
  GridworldConfig cfg_;
  ApRegistry ap_;  // the gridworld advice is a direct region; no labels needed
  std::vector<char> wall_;
  std::vector<int> teleport_targets_;
  std::vector<int> all_actions_;
  int pos_;
  int counter_;
};

enum class GridworldMdpVariant {
  // Exact model: state = (cell, steps-since-teleport); matches the simulator
  // distributionally and is the one to verify against.
  CounterAugmented,
  // Position-only approximation with a memoryless 1/budget teleport hazard;
  // small enough for by-hand study but not distributionally exact.
  Memoryless,
};

inline Mdp gridworld_as_mdp(const GridworldEnv& env,
                            GridworldMdpVariant variant = GridworldMdpVariant::CounterAugmented) {
  const auto& cfg = env.config();
  const int cells = env.num_states();
  const int green = env.cell_index(cfg.green);
  const auto& targets = env.teleport_targets();
  const double tp = 1.0 / static_cast<double>(targets.size());

  if (variant == GridworldMdpVariant::Memoryless) {
    Mdp m(cells, 4);
    m.action_names = {"up", "down", "left", "right"};
    m.initial_state = env.cell_index(cfg.start);
    m.coords.resize(cells);
    for (int s = 0; s < cells; ++s) m.coords[s] = env.coord(s);
    const double hazard = 1.0 / cfg.step_budget;
    for (int s = 0; s < cells; ++s)
      for (int a = 0; a < 4; ++a) {
        int t = env.move_target(s, a);
        if (t == green) {
          for (int dst : targets) m.add_transition(s, a, dst, tp, cfg.green_reward);
        } else {
          m.add_transition(s, a, t, 1.0 - hazard, 0.0);
          for (int dst : targets) m.add_transition(s, a, dst, hazard * tp, 0.0);
        }
      }
    return m;
  }

  const int budget = cfg.step_budget;
  Mdp m(cells * budget, 4);
  m.action_names = {"up", "down", "left", "right"};
  auto idx = [&](int cell, int k) { return cell * budget + k; };
  m.initial_state = idx(env.cell_index(cfg.start), 0);
  m.coords.resize(cells * budget);
  for (int s = 0; s < cells; ++s)
    for (int k = 0; k < budget; ++k) m.coords[idx(s, k)] = env.coord(s);

  for (int s = 0; s < cells; ++s)
    for (int k = 0; k < budget; ++k)
      for (int a = 0; a < 4; ++a) {
        int t = env.move_target(s, a);
        if (t == green) {
          for (int dst : targets) m.add_transition(idx(s, k), a, idx(dst, 0), tp, cfg.green_reward);
        } else if (k + 1 >= budget) {
          for (int dst : targets) m.add_transition(idx(s, k), a, idx(dst, 0), tp, 0.0);
        } else {
          m.add_transition(idx(s, k), a, idx(t, k + 1), 1.0, 0.0);
        }
      }
  return m;
}

}  // namespace averl

#endif  // AVERL_ENV_GRIDWORLD_HPP
