#ifndef AVERL_COMMON_HPP
#define AVERL_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace averl {

// Error taxonomy. Every failure the library can diagnose maps to one of these so
// callers (and tests) can distinguish "your model is broken" from "the math gave up".
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error { using Error::Error; };          // malformed file or formula
struct UnknownAtomError : Error { using Error::Error; };    // proposition not in the registry
struct RegistryMismatchError : Error { using Error::Error; }; // MDP and automaton disagree on AP
struct NonTotalTransitionError : Error { using Error::Error; }; // DFA missing a (state, letter) move
struct NotCommunicatingError : Error { using Error::Error; };
struct NonUnichainError : Error { using Error::Error; };
struct NoConvergenceError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };      // NaN/inf crept into a learner table
struct InvalidPotentialError : Error { using Error::Error; }; // bad C / distance spec
struct UnknownEnvError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };         // bad experiment / learner config
struct IoError : Error { using Error::Error; };
struct InsufficientSeedsError : Error { using Error::Error; }; // comparison needs >= 2 seeds

// Deterministic RNG. mt19937_64 plus hand-rolled draws so that results are
// bit-stable across platforms and standard-library versions; std::uniform_*
// distributions do not guarantee a fixed consumption pattern.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Fixed-width multiply keeps the draw unbiased
  // enough for simulation (bias < 2^-64) without a rejection loop.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(gen_()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index draw from unnormalized nonnegative weights; linear CDF scan so the
  // number of RNG consumptions per call is always exactly one.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;  // u landed on rounding slack
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[uniform_int(static_cast<int>(items.size()))];
  }

 private:
  std::mt19937_64 gen_;
};

// Stable seed derivation for sub-streams (environment vs learner vs per-seed
// runs). splitmix64 of (seed, tag); avalanches even for adjacent tags.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace averl

#endif  // AVERL_COMMON_HPP
