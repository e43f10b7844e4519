#ifndef AVERL_ENV_CARTPOLE_HPP
#define AVERL_ENV_CARTPOLE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "averl/common.hpp"
#include "averl/env/env.hpp"

namespace averl {

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

// Continuing cart-pole: no episode termination, reward 1 whenever the cart
// position stays within kScoreX and the pole within kScoreTheta of upright,
// evaluated on the post-step state. The cart speed is capped at kMaxXDot in
// magnitude. Tabular state is a fixed discretization of the four variables.
class CartPoleEnv : public Env {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kLength = 0.5;  // half the pole length
  static constexpr double kPoleMassLength = kMassPole * kLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kMaxXDot = 1.0;
  static constexpr double kScoreX = 2.4;
  static constexpr double kScoreTheta = M_PI / 15.0;

  static constexpr int kBinsX = 10;
  static constexpr int kBinsXDot = 6;
  static constexpr int kBinsTheta = 16;
  static constexpr int kBinsThetaDot = 10;
  static constexpr double kRangeX = 4.8;
  static constexpr double kRangeThetaDot = 10.0;

  CartPoleEnv() : ap_(std::vector<std::string>{}), avail_({0, 1}) {}

  int num_states() const override {
    return kBinsX * kBinsXDot * kBinsTheta * kBinsThetaDot;
  }
  int num_actions() const override { return 2; }
  const std::vector<int>& available_actions(int) const override { return avail_; }
  const ApRegistry& ap() const override { return ap_; }

  void reset(Rng& rng) override {
    cs_.x = rng.uniform(-0.05, 0.05);
    cs_.x_dot = rng.uniform(-0.05, 0.05);
    cs_.theta = rng.uniform(-0.05, 0.05);
    cs_.theta_dot = rng.uniform(-0.05, 0.05);
  }

  int state() const override { return discretize(cs_); }

  StepResult step(int action, Rng&) override {
    double force = action == 1 ? kForceMag : -kForceMag;
    double cos_t = std::cos(cs_.theta), sin_t = std::sin(cs_.theta);
    double temp =
        (force + kPoleMassLength * cs_.theta_dot * cs_.theta_dot * sin_t) / kTotalMass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
                       (kLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    cs_.x += kTau * cs_.x_dot;
    cs_.x_dot += kTau * x_acc;
    cs_.theta += kTau * cs_.theta_dot;
    cs_.theta_dot += kTau * theta_acc;

    cs_.x_dot = std::clamp(cs_.x_dot, -kMaxXDot, kMaxXDot);
    cs_.theta = wrap_angle(cs_.theta);

    double reward = scoring(cs_) ? 1.0 : 0.0;
    int s = discretize(cs_);
    return {s, reward, 0u};
  }

  static bool scoring(const CartPoleState& c) {
    return std::abs(c.x) <= kScoreX && std::abs(c.theta) <= kScoreTheta;
  }

  static double wrap_angle(double t) {
    t = std::remainder(t, 2.0 * M_PI);  // lands in [-pi, pi]
    if (t <= -M_PI) t += 2.0 * M_PI;
    return t;
  }

  // --- discretization -------------------------------------------------------

  static int discretize(const CartPoleState& c) {
    int xb = bin_of(c.x, -kRangeX, kRangeX, kBinsX);
    int vb = bin_of(c.x_dot, -kMaxXDot, kMaxXDot, kBinsXDot);
    int tb = bin_of(c.theta, -M_PI, M_PI, kBinsTheta);
    int wb = bin_of(c.theta_dot, -kRangeThetaDot, kRangeThetaDot, kBinsThetaDot);
    return ((xb * kBinsXDot + vb) * kBinsTheta + tb) * kBinsThetaDot + wb;
  }

  static int x_bin_of_state(int s) { return s / (kBinsXDot * kBinsTheta * kBinsThetaDot); }
  static int x_dot_bin_of_state(int s) {
    return (s / (kBinsTheta * kBinsThetaDot)) % kBinsXDot;
  }

  static double x_center(int bin) { return center_of(bin, -kRangeX, kRangeX, kBinsX); }
  static double x_dot_center(int bin) {
    return center_of(bin, -kMaxXDot, kMaxXDot, kBinsXDot);
  }

  // Bin-center one-step position prediction for a tabular state; the basis for
  // the position-safety advice.
  static double predicted_x(int s) {
    return x_center(x_bin_of_state(s)) + x_dot_center(x_dot_bin_of_state(s)) * kTau;
  }

  // Test hooks.
  const CartPoleState& continuous() const { return cs_; }
  void set_continuous(const CartPoleState& c) { cs_ = c; }

 private:
  static int bin_of(double v, double lo, double hi, int bins) {
    double t = (v - lo) / (hi - lo) * bins;
    int b = static_cast<int>(std::floor(t));
    return std::clamp(b, 0, bins - 1);
  }
  static double center_of(int bin, double lo, double hi, int bins) {
    return lo + (hi - lo) * (bin + 0.5) / bins;
  }

  ApRegistry ap_;
  std::vector<int> avail_;
  CartPoleState cs_;
};

}  // namespace averl

#endif  // AVERL_ENV_CARTPOLE_HPP
