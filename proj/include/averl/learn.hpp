#ifndef AVERL_LEARN_HPP
#define AVERL_LEARN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "averl/common.hpp"
#include "averl/env/env.hpp"
#include "averl/mdp.hpp"
#include "averl/potential.hpp"
#include "averl/winning.hpp"

namespace averl {

// ---------------------------------------------------------------------------
// Learner state and configuration.
// ---------------------------------------------------------------------------

struct ExplorationSchedule {
  enum class Kind { Softmax, EpsilonGreedy };
  Kind kind = Kind::Softmax;

  // Geometric interpolation from the start value at step 0 to the end value
  // at the last step of the run.
  double tau0 = 5.0;
  double tau_min = 0.05;
  double eps0 = 1.0;
  double eps_min = 0.05;

  double temperature(std::uint64_t t, std::uint64_t horizon) const {
    return interpolate(tau0, tau_min, t, horizon);
  }
  double epsilon(std::uint64_t t, std::uint64_t horizon) const {
    return interpolate(eps0, eps_min, t, horizon);
  }

 private:
  static double interpolate(double start, double end, std::uint64_t t,
                            std::uint64_t horizon) {
    if (horizon <= 1) return end;
    double frac = static_cast<double>(t) / static_cast<double>(horizon - 1);
    if (frac > 1.0) frac = 1.0;
    return start * std::pow(end / start, frac);
  }
};

// Whether the gain estimate is indexed by state (as the update rule is
// written) or kept as one scalar (the classical variant).
enum class RhoMode { PerState, SingleScalar };

struct LearnerConfig {
  double alpha = 0.1;
  double beta = 0.01;
  // When set, the effective rates shrink as alpha / (1 + visits(s,a))^exponent
  // and beta / (1 + visits(s))^exponent; used where convergence matters more
  // than tracking.
  bool decay_rates = false;
  double decay_exponent = 0.6;

  ExplorationSchedule exploration;
  RhoMode rho_mode = RhoMode::PerState;
  std::uint64_t seed = 0;

  void check() const {
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("alpha must be in (0, 1]");
    if (!(beta > 0.0) || beta > 1.0) throw ConfigError("beta must be in (0, 1]");
    if (exploration.kind == ExplorationSchedule::Kind::Softmax) {
      if (!(exploration.tau0 > 0.0) || !(exploration.tau_min > 0.0))
        throw ConfigError("softmax temperatures must be positive");
    } else {
      if (exploration.eps0 < 0.0 || exploration.eps0 > 1.0 ||
          exploration.eps_min < 0.0 || exploration.eps_min > 1.0)
        throw ConfigError("epsilon must be in [0, 1]");
    }
  }
};

struct LearnerState {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> q;    // s * A + a, zero-initialized
  std::vector<double> rho;  // per state, or a single entry in scalar mode
  RhoMode rho_mode = RhoMode::PerState;
  std::vector<std::uint32_t> sa_visits;
  std::vector<std::uint32_t> s_visits;
  std::uint64_t t = 0;

  double q_at(int s, int a) const {
    return q[static_cast<std::size_t>(s) * num_actions + a];
  }
  double& q_ref(int s, int a) {
    return q[static_cast<std::size_t>(s) * num_actions + a];
  }
  double rho_at(int s) const { return rho_mode == RhoMode::PerState ? rho[s] : rho[0]; }
  double& rho_ref(int s) { return rho_mode == RhoMode::PerState ? rho[s] : rho[0]; }
};

inline LearnerState make_learner_state(int num_states, int num_actions,
                                       RhoMode mode = RhoMode::PerState) {
  LearnerState st;
  st.num_states = num_states;
  st.num_actions = num_actions;
  st.rho_mode = mode;
  st.q.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
  st.rho.assign(mode == RhoMode::PerState ? num_states : 1, 0.0);
  st.sa_visits.assign(st.q.size(), 0);
  st.s_visits.assign(num_states, 0);
  return st;
}

// Blocks actions outside the winning region (plus any task relaxation) at
// selection time. States whose allowed set would be empty fall back to "all
// available" so the learner can never deadlock; such states are counted.
struct ShieldMask {
  int num_states = 0;
  int num_actions = 0;
  std::vector<char> allowed;  // s * A + a
  std::uint64_t fallback_states = 0;

  bool is_allowed(int s, int a) const {
    return allowed[static_cast<std::size_t>(s) * num_actions + a] != 0;
  }
};

// allow(s, a) is the combined region-or-relaxation predicate; availability
// comes from the environment so the mask never names impossible actions.
template <typename AllowFn>
ShieldMask build_shield(int num_states, int num_actions,
                        const std::vector<std::vector<int>>& available, AllowFn allow) {
  ShieldMask mask;
  mask.num_states = num_states;
  mask.num_actions = num_actions;
  mask.allowed.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
  for (int s = 0; s < num_states; ++s) {
    int kept = 0;
    for (int a : available[s])
      if (allow(s, a)) {
        mask.allowed[static_cast<std::size_t>(s) * num_actions + a] = 1;
        ++kept;
      }
    if (kept == 0) {
      for (int a : available[s])
        mask.allowed[static_cast<std::size_t>(s) * num_actions + a] = 1;
      ++mask.fallback_states;
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Updates.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_finite(const LearnerState& st, int s, int a) {
  if (!std::isfinite(st.q_at(s, a)) || !std::isfinite(st.rho_at(s)))
    throw NonFiniteError("non-finite learner value after update at step " +
                         std::to_string(st.t) + " (state " + std::to_string(s) +
                         ", action " + std::to_string(a) + ")");
}

inline std::pair<double, double> effective_rates(const LearnerState& st,
                                                 const LearnerConfig& cfg, int s, int a) {
  if (!cfg.decay_rates) return {cfg.alpha, cfg.beta};
  double ka = std::pow(1.0 + st.sa_visits[static_cast<std::size_t>(s) * st.num_actions + a],
                       -cfg.decay_exponent);
  double kb = std::pow(1.0 + st.s_visits[s], -cfg.decay_exponent);
  return {cfg.alpha * ka, cfg.beta * kb};
}

inline void bump_visits(LearnerState& st, int s, int a) {
  ++st.sa_visits[static_cast<std::size_t>(s) * st.num_actions + a];
  ++st.s_visits[s];
}

}  // namespace detail

// One tabular R-learning step:
//   delta = r + max_{a'} Q(s',a') - rho(s) - Q(s,a)
//   Q(s,a) += alpha * delta;  rho(s) += beta * delta
// Both increments use the same pre-update snapshot.
inline void r_learning_update(LearnerState& st, int s, int a, double r, int s2,
                              const LearnerConfig& cfg,
                              const std::vector<int>& avail_s2) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a2 : avail_s2) best = std::max(best, st.q_at(s2, a2));
  auto [alpha, beta] = detail::effective_rates(st, cfg, s, a);
  double delta = r + best - st.rho_at(s) - st.q_at(s, a);
  st.q_ref(s, a) += alpha * delta;
  st.rho_ref(s) += beta * delta;
  detail::bump_visits(st, s, a);
  detail::check_finite(st, s, a);
}

// Greedy action on Q + Phi, the bootstrapped stand-in for the optimal-policy
// argmax that the look-ahead shaping needs. Ties break to the lowest index.
// Phi enters as a difference against its value at the first available action:
// a per-state constant shift that leaves the argmax unchanged while making a
// constant table cancel exactly, so constant-potential runs match baseline
// runs bit for bit.
inline int bootstrap_argmax(const LearnerState& st, const PotentialTable& phi, int s,
                            const std::vector<int>& avail) {
  const double off = phi.at(s, avail.front());
  int best_a = avail.front();
  double best = -std::numeric_limits<double>::infinity();
  for (int a : avail) {
    double v = st.q_at(s, a) + (phi.at(s, a) - off);
    if (v > best) { best = v; best_a = a; }
  }
  return best_a;
}

// Shaped R-learning step (look-ahead advice): the reward gains
// F = Phi(s', a+) - Phi(s, a) and the bootstrap target is Q(s', a+) for the
// same a+, so the table estimates the shifted function Q - Phi whose greedy
// policy under Q + Phi is the original optimum.
inline void shaped_update(LearnerState& st, int s, int a, double r, int s2,
                          const PotentialTable& phi, const LearnerConfig& cfg,
                          const std::vector<int>& avail_s2) {
  int a_plus = bootstrap_argmax(st, phi, s2, avail_s2);
  double f = phi.at(s2, a_plus) - phi.at(s, a);
  auto [alpha, beta] = detail::effective_rates(st, cfg, s, a);
  double delta = (r + f) + st.q_at(s2, a_plus) - st.rho_at(s) - st.q_at(s, a);
  st.q_ref(s, a) += alpha * delta;
  st.rho_ref(s) += beta * delta;
  detail::bump_visits(st, s, a);
  detail::check_finite(st, s, a);
}

// ---------------------------------------------------------------------------
// Policies and action selection.
// ---------------------------------------------------------------------------

// Greedy policy of the learned table: argmax Q, or argmax (Q + Phi) when the
// table was trained with shaping. Ties break to the lowest action index.
inline StationaryPolicy recover_policy(const LearnerState& st, const PotentialTable* phi,
                                       const std::vector<std::vector<int>>& available) {
  StationaryPolicy pi;
  pi.action.assign(st.num_states, -1);
  for (int s = 0; s < st.num_states; ++s) {
    if (available[s].empty()) continue;
    const double off = phi ? phi->at(s, available[s].front()) : 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a : available[s]) {
      double v = st.q_at(s, a) + (phi ? phi->at(s, a) - off : 0.0);
      if (v > best) { best = v; pi.action[s] = a; }
    }
  }
  return pi;
}

// Samples an action at s. The preference value is Q (+ Phi when shaped); the
// support is the environment's available set, intersected with the shield's
// allowed set when one is active.
inline int select_action(const LearnerState& st, int s, const LearnerConfig& cfg,
                         const PotentialTable* phi, const ShieldMask* shield,
                         const std::vector<int>& avail, std::uint64_t horizon,
                         Rng& rng) {
  // Stack buffers keep the hot path allocation-free; kMaxSupport bounds the
  // per-state action count, far above every shipped environment.
  constexpr int kMaxSupport = 256;
  if (avail.size() > kMaxSupport)
    throw ConfigError("more than 256 available actions at one state");

  // Shield masks are built with a non-empty-support guarantee, but the
  // intersection with availability is re-checked so a mismatched mask fails
  // loudly instead of sampling nothing.
  int support[kMaxSupport];
  int n = 0;
  for (int a : avail)
    if (!shield || shield->is_allowed(s, a)) support[n++] = a;
  if (n == 0) {
    for (int a : avail) support[n++] = a;
    if (n == 0) throw ConfigError("no available action at state " + std::to_string(s));
  }

  // Phi is applied relative to its value at the first supported action. The
  // shift is constant within the state, so softmax probabilities and the
  // greedy choice are unchanged, and a constant table drops out exactly.
  const double phi_off = phi ? phi->at(s, support[0]) : 0.0;
  auto value = [&](int a) { return st.q_at(s, a) + (phi ? phi->at(s, a) - phi_off : 0.0); };

  if (cfg.exploration.kind == ExplorationSchedule::Kind::EpsilonGreedy) {
    double eps = cfg.exploration.epsilon(st.t, horizon);
    if (rng.uniform() < eps) return support[rng.uniform_int(n)];
    int best_a = support[0];
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (value(support[i]) > best) { best = value(support[i]); best_a = support[i]; }
    return best_a;
  }

  // Softmax with max-shifted logits; one RNG draw per call regardless of the
  // support size so interleaved streams stay aligned across variants.
  double tau = cfg.exploration.temperature(st.t, horizon);
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) vmax = std::max(vmax, value(support[i]));
  double w[kMaxSupport], total = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::exp((value(support[i]) - vmax) / tau);
    total += w[i];
  }
  double u = rng.uniform() * total, acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    if (u < acc) return support[i];
  }
  return support[n - 1];
}

// ---------------------------------------------------------------------------
// Training loop.
// ---------------------------------------------------------------------------

enum class Method { Baseline, Shaping, Shielding };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Baseline: return "baseline";
    case Method::Shaping: return "shaping";
    case Method::Shielding: return "shielding";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  if (name == "baseline") return Method::Baseline;
  if (name == "shaping") return Method::Shaping;
  if (name == "shielding") return Method::Shielding;
  throw ConfigError("unknown method: " + name + " (expected baseline|shaping|shielding)");
}

struct RunResult {
  std::vector<double> window_avg_reward;  // one entry per completed window
  LearnerState final_state;
  std::uint64_t total_steps = 0;
  int window = 0;
  std::uint64_t shield_fallback_states = 0;
};

// Runs one learner against one environment. The reward series records the raw
// environment reward, never r + F: every method is scored on the original
// objective. Environment and learner draws come from separate streams derived
// from the config seed, so the dynamics stay comparable across variants.
inline RunResult run_training(Env& env, const LearnerConfig& cfg,
                              const PotentialTable* phi, const ShieldMask* shield,
                              std::uint64_t total_steps, int window) {
  cfg.check();
  if (window < 1 || total_steps < static_cast<std::uint64_t>(window))
    throw ConfigError("need total_steps >= window >= 1");
  if (phi && (phi->num_states != env.num_states() || phi->num_actions != env.num_actions()))
    throw ConfigError("potential table dimensions do not match environment");
  if (shield && (shield->num_states != env.num_states() ||
                 shield->num_actions != env.num_actions()))
    throw ConfigError("shield dimensions do not match environment");

  Rng env_rng(derive_seed(cfg.seed, 1));
  Rng learner_rng(derive_seed(cfg.seed, 2));

  RunResult res;
  res.total_steps = total_steps;
  res.window = window;
  if (shield) res.shield_fallback_states = shield->fallback_states;

  LearnerState st = make_learner_state(env.num_states(), env.num_actions(), cfg.rho_mode);
  env.reset(env_rng);
  int s = env.state();

  double window_sum = 0.0;
  int in_window = 0;
  for (std::uint64_t t = 0; t < total_steps; ++t) {
    st.t = t;
    int a = select_action(st, s, cfg, phi, shield, env.available_actions(s),
                          total_steps, learner_rng);
    StepResult sr = env.step(a, env_rng);
    try {
      if (phi)
        shaped_update(st, s, a, sr.reward, sr.next_state, *phi, cfg,
                      env.available_actions(sr.next_state));
      else
        r_learning_update(st, s, a, sr.reward, sr.next_state, cfg,
                          env.available_actions(sr.next_state));
    } catch (const NonFiniteError& e) {
      throw NonFiniteError(std::string(e.what()) + " [run step " + std::to_string(t) + "]");
    }
    window_sum += sr.reward;
    if (++in_window == window) {
      res.window_avg_reward.push_back(window_sum / window);
      window_sum = 0.0;
      in_window = 0;
    }
    s = sr.next_state;
  }
  st.t = total_steps;
  res.final_state = std::move(st);
  return res;
}

}  // namespace averl

#endif  // AVERL_LEARN_HPP
