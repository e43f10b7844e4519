#ifndef AVERL_ENV_FACTORY_HPP
#define AVERL_ENV_FACTORY_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "averl/common.hpp"
#include "averl/env/cartpole.hpp"
#include "averl/env/env.hpp"
#include "averl/env/gridworld.hpp"
#include "averl/env/sweeping.hpp"
#include "averl/io.hpp"

namespace averl {

inline const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {
      "gridworld",       "gridworld-wall",    "sweep-kitchen", "sweep-kitchen-extra",
      "sweep-human",     "sweep-human-extra", "cartpole",      "cartpole-inaccurate",
  };
  return names;
}

// Benchmark environments by name, plus "mdp:PATH" which simulates an MDP
// loaded from file. `seed` fixes construction-time randomness (the sweeping
// trash frequencies and extra-cell sample); `layout_text` overrides the
// shipped sweeping floor plan when non-empty.
inline std::unique_ptr<Env> make_env(const std::string& name, std::uint64_t seed,
                                     const std::string& layout_text = "") {
  if (name.rfind("mdp:", 0) == 0)
    return std::unique_ptr<Env>(new TabularEnv(load_mdp(name.substr(4))));
  auto sweep = [&](SweepVariant v) {
    return layout_text.empty()
               ? std::make_unique<SweepingEnv>(v, seed)
               : std::make_unique<SweepingEnv>(v, seed, SweepLayout::parse(layout_text));
  };
  if (name == "gridworld") return std::unique_ptr<Env>(new GridworldEnv(GridworldConfig{}));
  if (name == "gridworld-wall") {
    GridworldConfig cfg;
    cfg.wall = true;
    return std::unique_ptr<Env>(new GridworldEnv(cfg));
  }
  if (name == "sweep-kitchen") return sweep(SweepVariant::Kitchen);
  if (name == "sweep-kitchen-extra") return sweep(SweepVariant::KitchenExtra);
  if (name == "sweep-human") return sweep(SweepVariant::Human);
  if (name == "sweep-human-extra") return sweep(SweepVariant::HumanExtra);
  if (name == "cartpole" || name == "cartpole-inaccurate")
    return std::unique_ptr<Env>(new CartPoleEnv());
  throw UnknownEnvError("unknown environment '" + name + "'");
}

// Reporting windows the published learning curves use.
inline int default_window(const std::string& env_name) {
  if (env_name.rfind("mdp:", 0) == 0) return 100;
  if (env_name == "gridworld" || env_name == "gridworld-wall") return 100;
  if (env_name == "sweep-kitchen" || env_name == "sweep-kitchen-extra") return 500;
  if (env_name == "sweep-human") return 2500;
  if (env_name == "sweep-human-extra") return 1000;
  if (env_name == "cartpole" || env_name == "cartpole-inaccurate") return 500;
  throw UnknownEnvError("unknown environment '" + env_name + "'");
}

}  // namespace averl

#endif  // AVERL_ENV_FACTORY_HPP
