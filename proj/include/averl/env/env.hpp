#ifndef AVERL_ENV_ENV_HPP
#define AVERL_ENV_ENV_HPP

#include <memory>
#include <string>
#include <vector>

#include "averl/ap.hpp"
#include "averl/common.hpp"
#include "averl/mdp.hpp"

namespace averl {

struct StepResult {
  int next_state;
  double reward;
  Letter label;  // L(next_state)
};

// A continuing environment over a finite (possibly discretized) state space.
// Envs never terminate; reset() only establishes initial conditions. All
// randomness flows through the caller's Rng so runs are replayable.
class Env {
 public:
  virtual ~Env() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual const std::vector<int>& available_actions(int s) const = 0;
  virtual const ApRegistry& ap() const = 0;

  virtual void reset(Rng& rng) = 0;
  virtual int state() const = 0;
  virtual StepResult step(int action, Rng& rng) = 0;
};

// Uniform stepping entry point: callers name the state they believe the env is
// in, which catches desynchronized interaction loops early.
inline StepResult env_step(Env& env, int state, int action, Rng& rng) {
  if (state != env.state())
    throw ConfigError("env_step called with stale state " + std::to_string(state) +
                      " (env is at " + std::to_string(env.state()) + ")");
  return env.step(action, rng);
}

// Simulator view of an explicit tabular MDP; the learning substrate for
// oracle-vs-learner studies and for training on user-supplied models.
class TabularEnv : public Env {
 public:
  explicit TabularEnv(Mdp mdp) : mdp_(std::move(mdp)), state_(mdp_.initial_state) {
    validate_or_throw(mdp_);
    avail_.resize(mdp_.num_states());
    for (int s = 0; s < mdp_.num_states(); ++s) avail_[s] = mdp_.available_actions(s);
  }

  int num_states() const override { return mdp_.num_states(); }
  int num_actions() const override { return mdp_.num_actions(); }
  const std::vector<int>& available_actions(int s) const override { return avail_[s]; }
  const ApRegistry& ap() const override { return mdp_.ap; }

  void reset(Rng&) override { state_ = mdp_.initial_state; }
  int state() const override { return state_; }

  StepResult step(int action, Rng& rng) override {
    const auto& row = mdp_.row(state_, action);
    if (row.empty())
      throw ConfigError("action " + std::to_string(action) + " unavailable at state " +
                        std::to_string(state_));
    double u = rng.uniform(), acc = 0.0;
    const Transition* chosen = &row.back();
    for (const auto& t : row) {
      acc += t.prob;
      if (u < acc) { chosen = &t; break; }
    }
    state_ = chosen->to;
    return {state_, chosen->reward, mdp_.label(state_)};
  }

  const Mdp& mdp() const { return mdp_; }

 private:
  Mdp mdp_;
  int state_;
  std::vector<std::vector<int>> avail_;
};

}  // namespace averl

#endif  // AVERL_ENV_ENV_HPP
