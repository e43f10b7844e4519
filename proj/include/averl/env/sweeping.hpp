#ifndef AVERL_ENV_SWEEPING_HPP
#define AVERL_ENV_SWEEPING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "averl/common.hpp"
#include "averl/env/env.hpp"
#include "averl/mdp.hpp"

namespace averl {

// Floor plan for the continual sweeping tasks. Cell types: '#' wall,
// '.' plain floor, 'K' kitchen, 'C' corridor, 'T' top-left room. 'R' marks the
// robot start (a plain-floor cell), 'H' the human start (a corridor cell).
// The human's walking region is the union of 'T' and 'C' cells.
struct SweepLayout {
  int width = 0;
  int height = 0;
  std::string cells;  // row-major type chars after R/H substitution
  int robot_start_cell = -1;
  int human_start_cell = -1;

  int cell(int r, int c) const { return r * width + c; }
  Coord coord(int idx) const { return {idx / width, idx % width}; }
  char type(int idx) const { return cells[static_cast<std::size_t>(idx)]; }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  bool is_floor(int idx) const { return type(idx) != '#'; }
  bool is_human_region(int idx) const { return type(idx) == 'T' || type(idx) == 'C'; }

  static SweepLayout parse(const std::string& text) {
    SweepLayout lay;
    std::vector<std::string> lines;
    std::string line;
    for (char ch : text + "\n") {
      if (ch == '\n') {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
          line.pop_back();
        if (!line.empty()) lines.push_back(line);
        line.clear();
      } else {
        line += ch;
      }
    }
    if (lines.empty()) throw ParseError("empty sweeping layout");
    lay.height = static_cast<int>(lines.size());
    lay.width = static_cast<int>(lines[0].size());
    for (const auto& l : lines)
      if (static_cast<int>(l.size()) != lay.width)
        throw ParseError("sweeping layout rows have unequal lengths");

    lay.cells.resize(static_cast<std::size_t>(lay.width) * lay.height);
    for (int r = 0; r < lay.height; ++r)
      for (int c = 0; c < lay.width; ++c) {
        char ch = lines[r][c];
        int idx = lay.cell(r, c);
        switch (ch) {
          case '#': case '.': case 'K': case 'C': case 'T':
            lay.cells[idx] = ch;
            break;
          case 'R':
            if (lay.robot_start_cell >= 0) throw ParseError("multiple robot starts");
            lay.robot_start_cell = idx;
            lay.cells[idx] = '.';
            break;
          case 'H':
            if (lay.human_start_cell >= 0) throw ParseError("multiple human starts");
            lay.human_start_cell = idx;
            lay.cells[idx] = 'C';
            break;
          default:
            throw ParseError(std::string("bad layout character '") + ch + "'");
        }
      }
    if (lay.robot_start_cell < 0) throw ParseError("layout has no robot start (R)");
    if (lay.human_start_cell < 0) throw ParseError("layout has no human start (H)");
    return lay;
  }

  // The shipped plan: 15x15, four rooms around a 3-row corridor, every room
  // connected through a door; kitchen is the bottom-right room. The robot
  // starts on the kitchen doorway, the human mid-corridor.
  static const char* standard_text() {
    return
        "TTTTTTT#.......\n"
        "TTTTTTT#.......\n"
        "TTTTTTT#.......\n"
        "TTTTTTT#.......\n"
        "TTTTTTT#.......\n"
        "#####T###.#####\n"
        "CCCCCCCCCCCCCCC\n"
        "CCCCCCCHCCCCCCC\n"
        "CCCCCCCCCCCCCCC\n"
        "#####.###R#####\n"
        ".......#KKKKKKK\n"
        ".......#KKKKKKK\n"
        ".......#KKKKKKK\n"
        ".......#KKKKKKK\n"
        ".......#KKKKKKK\n";
  }

  static const SweepLayout& standard() {
    static const SweepLayout lay = parse(standard_text());
    return lay;
  }
};

enum class SweepVariant {
  Kitchen,       // trash only in the kitchen
  KitchenExtra,  // kitchen plus a sampled half of the right-half corridor cells
  Human,         // trash only at the human's position
  HumanExtra,    // human plus every corridor cell
};

inline bool sweep_variant_has_human(SweepVariant v) {
  return v == SweepVariant::Human || v == SweepVariant::HumanExtra;
}

// Continual area sweeping. The robot moves up to 3 cells per step (any cell
// within Manhattan distance 3 that is reachable through floor in at most 3
// orthogonal hops), earns 1 for each trash it lands on, and trash appears and
// disappears stochastically per variant. With a human present the tabular
// state is the (robot, human) position pair and the label tracks line of
// sight; without one it is the robot position and the label tracks the
// kitchen.
class SweepingEnv : public Env {
 public:
  SweepingEnv(SweepVariant variant, std::uint64_t seed,
              const SweepLayout& layout = SweepLayout::standard())
      : variant_(variant), lay_(layout), has_human_(sweep_variant_has_human(variant)) {
    build_geometry();
    assign_trash_model(seed);
    ap_ = ApRegistry({has_human_ ? "human_visible" : "kitchen"});
    if (has_human_) precompute_visibility();
    robot_floor_ = floor_id_[lay_.robot_start_cell];
    human_id_ = has_human_ ? human_id_of_cell_[lay_.human_start_cell] : 0;
    dirty_.assign(lay_.cells.size(), 0);
  }

  // --- Env interface -------------------------------------------------------

  int num_states() const override {
    return has_human_ ? num_floor() * num_human_cells() : num_floor();
  }
  int num_actions() const override { return static_cast<int>(offsets_.size()); }
  const std::vector<int>& available_actions(int s) const override {
    return avail_[robot_of(s)];
  }
  const ApRegistry& ap() const override { return ap_; }

  void reset(Rng&) override {
    robot_floor_ = floor_id_[lay_.robot_start_cell];
    human_id_ = has_human_ ? human_id_of_cell_[lay_.human_start_cell] : 0;
    std::fill(dirty_.begin(), dirty_.end(), 0);
  }

  int state() const override {
    return has_human_ ? robot_floor_ * num_human_cells() + human_id_ : robot_floor_;
  }

  StepResult step(int action, Rng& rng) override {
    if (has_human_) {
      const auto& nb = human_neighbors_[human_id_];
      if (!nb.empty()) human_id_ = nb[rng.uniform_int(static_cast<int>(nb.size()))];
    }
    int target = move_target_[robot_floor_][action];
    if (target < 0)
      throw ConfigError("sweeping action " + std::to_string(action) +
                        " unavailable at robot cell " +
                        std::to_string(floor_cells_[robot_floor_]));
    robot_floor_ = target;

    for (int cell : dirtyable_)
      if (dirty_[cell] && rng.bernoulli(kCleanupProb)) dirty_[cell] = 0;
    for (const auto& [cell, freq] : spawn_cells_)
      if (!dirty_[cell] && rng.bernoulli(freq)) dirty_[cell] = 1;
    if (has_human_) {
      int hc = human_cells_[human_id_];
      if (!dirty_[hc] && rng.bernoulli(kHumanSpawnProb)) dirty_[hc] = 1;
    }

    double reward = 0.0;
    int rc = floor_cells_[robot_floor_];
    if (dirty_[rc]) {
      reward = 1.0;
      dirty_[rc] = 0;
    }
    int s = state();
    return {s, reward, label_of(s)};
  }

  // --- structure accessors -------------------------------------------------

  SweepVariant variant() const { return variant_; }
  const SweepLayout& layout() const { return lay_; }
  bool has_human() const { return has_human_; }

  int num_floor() const { return static_cast<int>(floor_cells_.size()); }
  int num_human_cells() const { return static_cast<int>(human_cells_.size()); }

  int robot_of(int s) const { return has_human_ ? s / num_human_cells() : s; }
  int human_of(int s) const { return has_human_ ? s % num_human_cells() : 0; }
  int robot_cell_of(int s) const { return floor_cells_[robot_of(s)]; }
  int human_cell_of(int s) const { return human_cells_[human_of(s)]; }
  int floor_cell(int f) const { return floor_cells_[f]; }
  int human_cell(int h) const { return human_cells_[h]; }
  int joint_state(int robot_floor, int human_id) const {
    return has_human_ ? robot_floor * num_human_cells() + human_id : robot_floor;
  }
  int floor_id(int cell) const { return floor_id_[cell]; }

  const std::vector<std::pair<int, double>>& spawn_cells() const { return spawn_cells_; }
  static constexpr double kCleanupProb = 0.2;
  static constexpr double kHumanSpawnProb = 0.2;

  bool visible(int robot_floor, int human_id) const {
    return vis_[static_cast<std::size_t>(robot_floor) * num_human_cells() + human_id] != 0;
  }

  Letter label_of(int s) const {
    if (has_human_) return visible(robot_of(s), human_of(s)) ? 1u : 0u;
    return lay_.type(floor_cells_[robot_of(s)]) == 'K' ? 1u : 0u;
  }

  // Offset of an action as (drow, dcol); the same 25-entry list at every cell,
  // with per-cell availability.
  std::pair<int, int> action_offset(int a) const { return offsets_[a]; }

  // Test hooks: pin positions and trash directly.
  void set_positions(int robot_cell, int human_cell) {
    robot_floor_ = floor_id_[robot_cell];
    if (has_human_) human_id_ = human_id_of_cell_[human_cell];
  }
  void set_trash(int cell, bool dirty) { dirty_[cell] = dirty ? 1 : 0; }
  bool trash_at(int cell) const { return dirty_[cell] != 0; }

  // Dynamics-and-labels model of the environment (no trash, zero rewards):
  // the substrate for synthesizing advice regions. State indices coincide
  // with the env's.
  const Mdp& advice_mdp() const {
    if (advice_.num_states() == 0) advice_ = build_advice_mdp();
    return advice_;
  }

 private:
  void build_geometry() {
    const int n = static_cast<int>(lay_.cells.size());
    floor_id_.assign(n, -1);
    human_id_of_cell_.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      if (lay_.is_floor(i)) {
        floor_id_[i] = static_cast<int>(floor_cells_.size());
        floor_cells_.push_back(i);
      }
      if (lay_.is_human_region(i)) {
        human_id_of_cell_[i] = static_cast<int>(human_cells_.size());
        human_cells_.push_back(i);
      }
    }

    for (int dr = -3; dr <= 3; ++dr)
      for (int dc = -3; dc <= 3; ++dc)
        if (std::abs(dr) + std::abs(dc) <= 3) offsets_.emplace_back(dr, dc);

    // Robot moves: BFS through floor, depth <= 3, so walls are respected and
    // the Manhattan speed bound holds automatically.
    move_target_.assign(floor_cells_.size(), std::vector<int>(offsets_.size(), -1));
    avail_.resize(floor_cells_.size());
    for (int f = 0; f < num_floor(); ++f) {
      std::vector<int> dist(n, -1);
      std::deque<int> queue = {floor_cells_[f]};
      dist[floor_cells_[f]] = 0;
      while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (dist[cur] == 3) continue;
        Coord cc = lay_.coord(cur);
        const int dr4[] = {-1, 1, 0, 0}, dc4[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          int r2 = cc.row + dr4[k], c2 = cc.col + dc4[k];
          if (!lay_.in_bounds(r2, c2)) continue;
          int idx = lay_.cell(r2, c2);
          if (!lay_.is_floor(idx) || dist[idx] >= 0) continue;
          dist[idx] = dist[cur] + 1;
          queue.push_back(idx);
        }
      }
      Coord from = lay_.coord(floor_cells_[f]);
      for (std::size_t a = 0; a < offsets_.size(); ++a) {
        int r2 = from.row + offsets_[a].first, c2 = from.col + offsets_[a].second;
        if (!lay_.in_bounds(r2, c2)) continue;
        int idx = lay_.cell(r2, c2);
        if (idx >= 0 && lay_.is_floor(idx) && dist[idx] >= 0 && dist[idx] <= 3) {
          move_target_[f][a] = floor_id_[idx];
          avail_[f].push_back(static_cast<int>(a));
        }
      }
    }

    if (has_human_) {
      human_neighbors_.resize(human_cells_.size());
      for (int h = 0; h < num_human_cells(); ++h) {
        Coord hc = lay_.coord(human_cells_[h]);
        const int dr4[] = {-1, 1, 0, 0}, dc4[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          int r2 = hc.row + dr4[k], c2 = hc.col + dc4[k];
          if (!lay_.in_bounds(r2, c2)) continue;
          int idx = lay_.cell(r2, c2);
          if (lay_.is_human_region(idx)) human_neighbors_[h].push_back(human_id_of_cell_[idx]);
        }
      }
    }
  }

  // Trash sources: kitchen cells for the kitchen tasks (the -extra variant
  // adds a seed-sampled half of the corridor cells with column >= width/2),
  // every corridor cell for the human -extra variant. Frequencies are drawn
  // once per construction from U[1/20, 1/10]; the human's cell spawns with a
  // fixed 0.2 regardless of variant frequency lists.
  void assign_trash_model(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xFEED));
    auto type_cells = [&](char ty, auto pred) {
      std::vector<int> out;
      for (int i = 0; i < static_cast<int>(lay_.cells.size()); ++i)
        if (lay_.type(i) == ty && pred(lay_.coord(i))) out.push_back(i);
      return out;
    };
    auto any = [](const Coord&) { return true; };

    std::vector<int> cells;
    if (variant_ == SweepVariant::Kitchen || variant_ == SweepVariant::KitchenExtra)
      cells = type_cells('K', any);
    if (variant_ == SweepVariant::KitchenExtra) {
      auto right_half =
          type_cells('C', [&](const Coord& c) { return c.col >= lay_.width / 2; });
      for (std::size_t i = right_half.size(); i > 1; --i)
        std::swap(right_half[i - 1], right_half[rng.uniform_int(static_cast<int>(i))]);
      right_half.resize(right_half.size() / 2);
      std::sort(right_half.begin(), right_half.end());
      cells.insert(cells.end(), right_half.begin(), right_half.end());
    }
    if (variant_ == SweepVariant::HumanExtra) cells = type_cells('C', any);

    for (int cell : cells) spawn_cells_.emplace_back(cell, rng.uniform(1.0 / 20.0, 1.0 / 10.0));

    std::vector<char> can_be_dirty(lay_.cells.size(), 0);
    for (const auto& [cell, freq] : spawn_cells_) can_be_dirty[cell] = 1;
    if (has_human_)
      for (int cell : human_cells_) can_be_dirty[cell] = 1;
    for (int i = 0; i < static_cast<int>(lay_.cells.size()); ++i)
      if (can_be_dirty[i]) dirtyable_.push_back(i);
  }

  // Line of sight: Euclidean range 5 between cell centers, blocked when the
  // open segment between the centers crosses the interior of any wall cell.
  // Grazing a wall corner or edge does not block.
  void precompute_visibility() {
    std::vector<Coord> walls;
    for (int i = 0; i < static_cast<int>(lay_.cells.size()); ++i)
      if (!lay_.is_floor(i)) walls.push_back(lay_.coord(i));

    vis_.assign(static_cast<std::size_t>(num_floor()) * num_human_cells(), 0);
    for (int f = 0; f < num_floor(); ++f) {
      Coord a = lay_.coord(floor_cells_[f]);
      for (int h = 0; h < num_human_cells(); ++h) {
        Coord b = lay_.coord(human_cells_[h]);
        int d2 = (a.row - b.row) * (a.row - b.row) + (a.col - b.col) * (a.col - b.col);
        if (d2 > 25) continue;
        bool blocked = false;
        for (const auto& w : walls)
          if (segment_crosses_cell(a, b, w)) { blocked = true; break; }
        if (!blocked)
          vis_[static_cast<std::size_t>(f) * num_human_cells() + h] = 1;
      }
    }
  }

  static bool segment_crosses_cell(const Coord& a, const Coord& b, const Coord& w) {
    double t0 = 0.0, t1 = 1.0;
    const double p[2] = {static_cast<double>(a.row), static_cast<double>(a.col)};
    const double q[2] = {static_cast<double>(b.row), static_cast<double>(b.col)};
    const double c[2] = {static_cast<double>(w.row), static_cast<double>(w.col)};
    for (int axis = 0; axis < 2; ++axis) {
      double d = q[axis] - p[axis];
      double lo = c[axis] - 0.5, hi = c[axis] + 0.5;
      if (d == 0.0) {
        if (p[axis] <= lo || p[axis] >= hi) return false;
      } else {
        double ta = (lo - p[axis]) / d, tb = (hi - p[axis]) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
    }
    return t1 - t0 > 1e-12;  // positive-length overlap with the interior
  }

  Mdp build_advice_mdp() const {
    Mdp m(num_states(), num_actions());
    m.ap = ap_;
    m.initial_state = joint_state(floor_id_[lay_.robot_start_cell],
                                  has_human_ ? human_id_of_cell_[lay_.human_start_cell] : 0);
    m.coords.resize(num_states());
    for (int s = 0; s < num_states(); ++s) {
      m.coords[s] = lay_.coord(robot_cell_of(s));
      m.set_label(s, label_of(s));
    }
    for (int s = 0; s < num_states(); ++s) {
      int f = robot_of(s), h = human_of(s);
      for (int a : avail_[f]) {
        int f2 = move_target_[f][a];
        if (!has_human_) {
          m.add_transition(s, a, f2, 1.0, 0.0);
          continue;
        }
        const auto& nb = human_neighbors_[h];
        double pr = 1.0 / static_cast<double>(nb.size());
        for (int h2 : nb) m.add_transition(s, a, joint_state(f2, h2), pr, 0.0);
      }
    }
    return m;
  }

  SweepVariant variant_;
  SweepLayout lay_;
  bool has_human_;
  ApRegistry ap_;

  std::vector<int> floor_cells_;
  std::vector<int> floor_id_;
  std::vector<int> human_cells_;
  std::vector<int> human_id_of_cell_;
  std::vector<std::pair<int, int>> offsets_;
  std::vector<std::vector<int>> move_target_;  // floor x action -> floor id or -1
  std::vector<std::vector<int>> avail_;
  std::vector<std::vector<int>> human_neighbors_;
  std::vector<char> vis_;

  std::vector<std::pair<int, double>> spawn_cells_;
  std::vector<int> dirtyable_;

  int robot_floor_ = 0;
  int human_id_ = 0;
  std::vector<char> dirty_;
  mutable Mdp advice_;
};

}  // namespace averl

#endif  // AVERL_ENV_SWEEPING_HPP
