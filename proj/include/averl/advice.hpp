#ifndef AVERL_ADVICE_HPP
#define AVERL_ADVICE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "averl/automaton.hpp"
#include "averl/common.hpp"
#include "averl/env/cartpole.hpp"
#include "averl/env/env.hpp"
#include "averl/env/gridworld.hpp"
#include "averl/env/sweeping.hpp"
#include "averl/learn.hpp"
#include "averl/potential.hpp"
#include "averl/product.hpp"
#include "averl/winning.hpp"

namespace averl {

// How a shield maps the winning region to an action filter. RegionOnly admits
// exactly the region's pairs (with the mask's empty-state fallback);
// RegionOrCloser additionally admits actions whose expected successor strictly
// decreases the same distance the potential scores with.
enum class ShieldRule { RegionOnly, RegionOrCloser };

inline const char* shield_rule_name(ShieldRule r) {
  return r == ShieldRule::RegionOnly ? "region_only" : "region_or_closer";
}

// The published advice for one benchmark: either an invariant formula over the
// environment's propositions (compiled and solved against its dynamics model)
// or a directly specified region, plus the distance shape, the constant C, and
// the shield construction rule.
struct AdvicePackage {
  std::string env_name;
  std::string formula_text;  // empty means the region is specified directly
  DistanceSpec distance;
  double c = 1.0;
  ShieldRule shield_rule = ShieldRule::RegionOnly;
};

// Everything the learner consumes, materialized against a concrete env.
struct SynthesizedAdvice {
  AdvicePackage package;
  WinningRegion region;
  PotentialTable potential;
  ShieldMask shield;
};

// Core synthesis path for explicit models: formula -> automaton -> product ->
// almost-sure region -> potential.
struct MdpAdviceResult {
  WinningRegion region;
  PotentialTable potential;
};

inline MdpAdviceResult synthesize_from_automaton(const Mdp& m, const SafetyAutomaton& aut,
                                                 double c, const DistanceSpec& spec) {
  ProductMdp prod = build_product(m, aut);
  MdpAdviceResult out;
  out.region = almost_sure_region(prod);
  out.potential = synthesize_potential(m, out.region, c, spec);
  return out;
}

inline MdpAdviceResult synthesize_from_formula(const Mdp& m, const std::string& formula,
                                               double c, const DistanceSpec& spec) {
  InvariantFormula f = parse_invariant(formula, m.ap);
  return synthesize_from_automaton(m, compile_invariant(f, m.ap), c, spec);
}

namespace detail {

inline WinningRegion direct_region(int num_states, int num_actions) {
  WinningRegion w;
  w.num_states = num_states;
  w.num_actions = num_actions;
  w.member.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
  return w;
}

inline std::vector<std::vector<int>> availability_of(const Env& env) {
  std::vector<std::vector<int>> avail(env.num_states());
  for (int s = 0; s < env.num_states(); ++s) avail[s] = env.available_actions(s);
  return avail;
}

// Min Manhattan distance from every floor cell to the kitchen, the metric both
// the kitchen potential and the kitchen shield relaxation are defined with.
inline std::vector<int> kitchen_distance(const SweepingEnv& sw) {
  const auto& lay = sw.layout();
  std::vector<Coord> kitchen;
  for (int i = 0; i < static_cast<int>(lay.cells.size()); ++i)
    if (lay.type(i) == 'K') kitchen.push_back(lay.coord(i));
  std::vector<int> dist(sw.num_floor(), 0);
  for (int f = 0; f < sw.num_floor(); ++f) {
    Coord c = lay.coord(sw.robot_cell_of(f));
    int best = std::numeric_limits<int>::max();
    for (const auto& k : kitchen) best = std::min(best, manhattan(c, k));
    dist[f] = best;
  }
  return dist;
}

// Scoring half-width the cart-pole advice believes in; the env itself always
// pays on the true range.
inline double cartpole_advice_range(const std::string& env_name) {
  return env_name == "cartpole-inaccurate" ? 2.0 : CartPoleEnv::kScoreX;
}

inline double cartpole_predicted_violation(int s, double range) {
  double xp = CartPoleEnv::predicted_x(s);
  return std::max(0.0, std::abs(xp) - range);
}

}  // namespace detail

// Built-in advice for each benchmark env, keyed by factory name.
inline AdvicePackage reference_advice(const Env& env, const std::string& env_name) {
  AdvicePackage pkg;
  pkg.env_name = env_name;
  pkg.c = 1.0;

  if (env_name == "gridworld" || env_name == "gridworld-wall") {
    // Direct advice "only move down or right"; every state keeps both.
    pkg.distance = DistanceSpec::constant(-1.0);
    pkg.shield_rule = ShieldRule::RegionOnly;
    return pkg;
  }
  if (env_name == "sweep-kitchen" || env_name == "sweep-kitchen-extra") {
    pkg.formula_text = "G kitchen";
    pkg.distance = DistanceSpec::manhattan_to_target("kitchen", 1.0, 1.0);
    pkg.shield_rule = ShieldRule::RegionOrCloser;
    return pkg;
  }
  if (env_name == "sweep-human" || env_name == "sweep-human-extra") {
    pkg.formula_text = "G human_visible";
    // Filled at synthesis time: negative distance to the nearest robot cell
    // with a winning action under the current human position, -6 when the
    // human is invisible or no such cell exists.
    pkg.distance = DistanceSpec::custom({});
    pkg.shield_rule = ShieldRule::RegionOnly;
    return pkg;
  }
  if (env_name == "cartpole" || env_name == "cartpole-inaccurate") {
    // Region from the one-step position prediction x + x_dot * tau; filled at
    // synthesis time as -1 * (distance from the prediction to the range).
    pkg.distance = DistanceSpec::custom({});
    pkg.shield_rule = ShieldRule::RegionOnly;
    return pkg;
  }
  throw UnknownEnvError("no reference advice for environment '" + env_name + "'");
}

// Materializes the reference advice against a live env: winning region (via
// the formula pipeline where the advice is a formula), potential table, and
// shield mask.
inline SynthesizedAdvice synthesize_advice(const Env& env, const std::string& env_name) {
  SynthesizedAdvice out;
  out.package = reference_advice(env, env_name);
  const auto avail = detail::availability_of(env);
  const int S = env.num_states(), A = env.num_actions();

  if (env_name == "gridworld" || env_name == "gridworld-wall") {
    out.region = detail::direct_region(S, A);
    for (int s = 0; s < S; ++s) {
      out.region.member[static_cast<std::size_t>(s) * A + kDown] = 1;
      out.region.member[static_cast<std::size_t>(s) * A + kRight] = 1;
    }
    const auto* grid = dynamic_cast<const GridworldEnv*>(&env);
    if (grid == nullptr) throw ConfigError("gridworld advice needs a GridworldEnv");
    Mdp m = gridworld_as_mdp(*grid, GridworldMdpVariant::Memoryless);
    out.potential = synthesize_potential(m, out.region, out.package.c, out.package.distance);
    out.shield = build_shield(S, A, avail, [&](int s, int a) {
      return out.region.contains(s, a);
    });
    return out;
  }

  if (env_name == "sweep-kitchen" || env_name == "sweep-kitchen-extra" ||
      env_name == "sweep-human" || env_name == "sweep-human-extra") {
    const auto* sw = dynamic_cast<const SweepingEnv*>(&env);
    if (sw == nullptr) throw ConfigError("sweeping advice needs a SweepingEnv");
    const Mdp& m = sw->advice_mdp();

    if (!sw->has_human()) {
      auto core = synthesize_from_formula(m, out.package.formula_text, out.package.c,
                                          out.package.distance);
      out.region = std::move(core.region);
      out.potential = std::move(core.potential);
      const auto kdist = detail::kitchen_distance(*sw);
      out.shield = build_shield(S, A, avail, [&](int s, int a) {
        if (out.region.contains(s, a)) return true;
        double expected = 0.0;
        for (const auto& t : m.row(s, a))
          expected += t.prob * kdist[sw->robot_of(t.to)];
        return expected < static_cast<double>(kdist[sw->robot_of(s)]);
      });
      return out;
    }

    InvariantFormula f = parse_invariant(out.package.formula_text, m.ap);
    ProductMdp prod = build_product(m, compile_invariant(f, m.ap));
    out.region = almost_sure_region(prod);

    // For each human position, the set of robot cells holding any winning
    // action; d is the negative Manhattan distance to the nearest one.
    constexpr double kUnknown = -6.0;
    std::vector<double> d(static_cast<std::size_t>(S) * A, kUnknown);
    const int nh = sw->num_human_cells();
    std::vector<std::vector<int>> winning_cells(nh);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        if (out.region.contains(s, a)) {
          winning_cells[sw->human_of(s)].push_back(sw->robot_of(s));
          break;
        }
    const auto& lay = sw->layout();
    for (int s = 0; s < S; ++s) {
      const int r = sw->robot_of(s), h = sw->human_of(s);
      if (!sw->visible(r, h) || winning_cells[h].empty()) continue;
      Coord rc = lay.coord(sw->robot_cell_of(s));
      int best = std::numeric_limits<int>::max();
      for (int f2 : winning_cells[h])
        best = std::min(best, manhattan(rc, lay.coord(sw->floor_cell(f2))));
      double val = -static_cast<double>(best);
      for (int a = 0; a < A; ++a) d[static_cast<std::size_t>(s) * A + a] = val;
    }
    out.package.distance = DistanceSpec::custom(std::move(d));
    out.potential = synthesize_potential(m, out.region, out.package.c, out.package.distance);
    out.shield = build_shield(S, A, avail, [&](int s, int a) {
      return out.region.contains(s, a);
    });
    return out;
  }

  if (env_name == "cartpole" || env_name == "cartpole-inaccurate") {
    const double range = detail::cartpole_advice_range(env_name);
    out.region = detail::direct_region(S, A);
    std::vector<double> d(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
      double viol = detail::cartpole_predicted_violation(s, range);
      if (viol == 0.0) {
        out.region.member[static_cast<std::size_t>(s) * A + 0] = 1;
        out.region.member[static_cast<std::size_t>(s) * A + 1] = 1;
      } else {
        // Block the push toward the predicted violation, keep the push away.
        int away = CartPoleEnv::predicted_x(s) > 0.0 ? 0 : 1;
        out.region.member[static_cast<std::size_t>(s) * A + away] = 1;
      }
      d[static_cast<std::size_t>(s) * A + 0] = -viol;
      d[static_cast<std::size_t>(s) * A + 1] = -viol;
    }
    out.package.distance = DistanceSpec::custom(std::move(d));
    Mdp shell(S, A);  // carries only dimensions for the potential builder
    out.potential =
        synthesize_potential(shell, out.region, out.package.c, out.package.distance);
    out.shield = build_shield(S, A, avail, [&](int s, int a) {
      return out.region.contains(s, a);
    });
    return out;
  }

  throw UnknownEnvError("no advice synthesis for environment '" + env_name + "'");
}

}  // namespace averl

#endif  // AVERL_ADVICE_HPP
