#ifndef AVERL_POTENTIAL_HPP
#define AVERL_POTENTIAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "averl/common.hpp"
#include "averl/mdp.hpp"
#include "averl/solve.hpp"
#include "averl/winning.hpp"

namespace averl {

// How to score state-action pairs outside the winning region. The three
// published shapes plus an arbitrary table for environment-specific advice.
struct DistanceSpec {
  enum class Kind { ConstantPenalty, ManhattanToRegion, ManhattanToTarget, Custom };
  Kind kind = Kind::ConstantPenalty;

  double value = -1.0;       // ConstantPenalty
  double scale = 1.0;        // Manhattan variants: d = -scale * distance (+ bonus)
  double closer_bonus = 0.0; // added when the action's expected successor is closer
  std::string target_label;  // ManhattanToTarget
  std::vector<double> table; // Custom, flat (s * A + a)

  static DistanceSpec constant(double v) {
    DistanceSpec d; d.kind = Kind::ConstantPenalty; d.value = v; return d;
  }
  static DistanceSpec manhattan_to_region(double scale, double bonus) {
    DistanceSpec d; d.kind = Kind::ManhattanToRegion;
    d.scale = scale; d.closer_bonus = bonus; return d;
  }
  static DistanceSpec manhattan_to_target(std::string label, double scale, double bonus) {
    DistanceSpec d; d.kind = Kind::ManhattanToTarget;
    d.target_label = std::move(label); d.scale = scale; d.closer_bonus = bonus; return d;
  }
  static DistanceSpec custom(std::vector<double> table) {
    DistanceSpec d; d.kind = Kind::Custom; d.table = std::move(table); return d;
  }

  std::string id() const {
    auto num = [](double v) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      return std::string(buf);
    };
    switch (kind) {
      case Kind::ConstantPenalty: return "constant(" + num(value) + ")";
      case Kind::ManhattanToRegion:
        return "manhattan_to_region(" + num(scale) + "," + num(closer_bonus) + ")";
      case Kind::ManhattanToTarget:
        return "manhattan_to_target(" + target_label + "," + num(scale) + "," +
               num(closer_bonus) + ")";
      case Kind::Custom: return "custom";
    }
    return "unknown";
  }
};

// Phi(s,a): exactly C on winning pairs, a distance score strictly below C
// everywhere else.
struct PotentialTable {
  int num_states = 0;
  int num_actions = 0;
  double c = 0.0;
  std::string distance_id;
  std::vector<double> phi;      // s * A + a
  std::vector<char> in_region;  // same indexing

  int clamped_count = 0;   // distance values that had to be pulled below C
  bool empty_region = false;

  double at(int s, int a) const {
    return phi[static_cast<std::size_t>(s) * num_actions + a];
  }
  bool member(int s, int a) const {
    return in_region[static_cast<std::size_t>(s) * num_actions + a] != 0;
  }

  // Adding one constant to Phi and C together preserves the member/non-member
  // dichotomy; shaping built from the shifted table telescopes identically.
  PotentialTable shifted(double delta) const {
    PotentialTable out = *this;
    out.c += delta;
    for (double& v : out.phi) v += delta;
    return out;
  }
};

namespace detail {

// Min Manhattan distance from each state's coordinate to any coordinate in
// `targets`; states are scored pointwise, so this stays exact for the small
// target sets the advice packages use.
inline std::vector<int> min_manhattan(const Mdp& m, const std::vector<Coord>& targets) {
  std::vector<int> dist(m.num_states(), std::numeric_limits<int>::max() / 2);
  for (int s = 0; s < m.num_states(); ++s)
    for (const auto& t : targets)
      dist[s] = std::min(dist[s], manhattan(m.coords[s], t));
  return dist;
}

inline std::vector<double> distance_values(const Mdp& m, const WinningRegion& region,
                                           const DistanceSpec& spec) {
  const int S = m.num_states(), A = m.num_actions();
  std::vector<double> d(static_cast<std::size_t>(S) * A, 0.0);

  switch (spec.kind) {
    case DistanceSpec::Kind::ConstantPenalty:
      std::fill(d.begin(), d.end(), spec.value);
      return d;

    case DistanceSpec::Kind::Custom:
      if (spec.table.size() != d.size())
        throw ConfigError("custom distance table size does not match MDP");
      return spec.table;

    case DistanceSpec::Kind::ManhattanToRegion:
    case DistanceSpec::Kind::ManhattanToTarget: {
      if (!m.has_coords())
        throw ConfigError("Manhattan distance spec needs state coordinates");
      std::vector<Coord> targets;
      if (spec.kind == DistanceSpec::Kind::ManhattanToTarget) {
        const int bit = m.ap.index(spec.target_label);
        for (int s = 0; s < S; ++s)
          if (letter_has(m.label(s), bit)) targets.push_back(m.coords[s]);
      } else {
        for (int s = 0; s < S; ++s)
          for (int a = 0; a < A; ++a)
            if (region.contains(s, a)) { targets.push_back(m.coords[s]); break; }
      }
      if (targets.empty()) {
        // Nothing to measure against; score every pair as "one past the
        // farthest possible cell" so the shape stays a penalty.
        int diameter = 0;
        for (int s = 0; s < S; ++s)
          for (int s2 = s + 1; s2 < S; ++s2)
            diameter = std::max(diameter, manhattan(m.coords[s], m.coords[s2]));
        std::fill(d.begin(), d.end(), -spec.scale * (diameter + 1));
        return d;
      }
      std::vector<int> dist = min_manhattan(m, targets);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          if (!m.action_available(s, a)) continue;
          double base = -spec.scale * dist[s];
          if (spec.closer_bonus != 0.0) {
            double expected = 0.0;
            for (const auto& t : m.row(s, a)) expected += t.prob * dist[t.to];
            if (expected < dist[s]) base += spec.closer_bonus;
          }
          d[static_cast<std::size_t>(s) * A + a] = base;
        }
      }
      return d;
    }
  }
  return d;
}

}  // namespace detail

// Builds Phi from the winning region: C on members, the distance score on
// everything else, with scores at or above C clamped to C - 1e-6 so the
// strict dichotomy survives ill-chosen distance specs (clamps are counted,
// not silently absorbed).
inline PotentialTable synthesize_potential(const Mdp& m, const WinningRegion& region,
                                           double c, const DistanceSpec& spec) {
  if (!std::isfinite(c)) throw InvalidPotentialError("C must be finite");
  if (region.num_states != m.num_states() || region.num_actions != m.num_actions())
    throw ConfigError("winning region dimensions do not match MDP");

  constexpr double kClampEps = 1e-6;
  PotentialTable out;
  out.num_states = m.num_states();
  out.num_actions = m.num_actions();
  out.c = c;
  out.distance_id = spec.id();
  out.in_region.assign(region.member.begin(), region.member.end());
  out.empty_region = region.empty();

  std::vector<double> d = detail::distance_values(m, region, spec);
  out.phi.resize(d.size());
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < m.num_actions(); ++a) {
      const std::size_t i = static_cast<std::size_t>(s) * m.num_actions() + a;
      if (region.contains(s, a)) {
        out.phi[i] = c;
      } else {
        double v = d[i];
        if (!std::isfinite(v))
          throw InvalidPotentialError("distance spec produced a non-finite value");
        if (v >= c) {
          v = c - kClampEps;
          ++out.clamped_count;
        }
        out.phi[i] = v;
      }
    }
  return out;
}

// Reward transform of the look-ahead shaping evaluated with the true optimal
// table: R'(s,a,s') = R(s,a,s') + Phi(s', a+) - Phi(s,a) where a+ is the
// greedy optimal action at s'. Used by the gain-invariance oracle; the online
// learner bootstraps the same shift from its own table instead.
inline Mdp shaped_mdp(const Mdp& m, const PotentialTable& phi,
                      const std::vector<double>& q_star) {
  StationaryPolicy greedy = greedy_policy(m, q_star);
  Mdp out = m;
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < m.num_actions(); ++a) {
      if (!m.action_available(s, a)) continue;
      std::vector<Transition> row = m.row(s, a);
      for (auto& t : row)
        t.reward += phi.at(t.to, greedy[t.to]) - phi.at(s, a);
      out.set_row(s, a, std::move(row));
    }
  return out;
}

}  // namespace averl

#endif  // AVERL_POTENTIAL_HPP
