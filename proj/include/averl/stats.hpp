#ifndef AVERL_STATS_HPP
#define AVERL_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "averl/common.hpp"

namespace averl {

// Streaming mean/variance (Welford). variance() is the sample variance.
class Welford {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }
  double stddev() const { return std::sqrt(variance()); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

namespace detail {

// Continued-fraction core of the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15, kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NoConvergenceError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Regularized lower incomplete gamma P(a, x).
inline double incomplete_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw ConfigError("incomplete_gamma_p needs a > 0");
  if (x <= 0.0) return 0.0;
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-15, kTiny = 1e-300;
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps)
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw NoConvergenceError("incomplete gamma series did not converge");
  }
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
      return 1.0 - q;
    }
  }
  throw NoConvergenceError("incomplete gamma continued fraction did not converge");
}

// Student t CDF with `dof` degrees of freedom (dof may be fractional).
inline double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ConfigError("student_t_cdf needs dof > 0");
  double x = dof / (dof + t * t);
  double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

// Upper quantile: the t with CDF(t) = p, for p in (0.5, 1). Bisection; the CDF
// is strictly increasing so 200 halvings pin the root far below measurement
// noise.
inline double student_t_quantile(double p, double dof) {
  if (!(p > 0.5 && p < 1.0)) throw ConfigError("student_t_quantile needs p in (0.5, 1)");
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, dof) < p) {
    hi *= 2.0;
    if (hi > 1e12) throw NoConvergenceError("t quantile bracket blew up");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Welch's unequal-variance t comparison of two samples.
struct WelchResult {
  double mean_a = 0.0, mean_b = 0.0;
  double mean_diff = 0.0;  // a - b
  double ci_lo = 0.0, ci_hi = 0.0;
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // two-sided
};

inline WelchResult welch_compare(const std::vector<double>& a, const std::vector<double>& b,
                                 double confidence = 0.95) {
  if (a.size() < 2 || b.size() < 2)
    throw ConfigError("welch_compare needs at least 2 samples per group");
  Welford wa, wb;
  for (double v : a) wa.add(v);
  for (double v : b) wb.add(v);
  const double na = static_cast<double>(wa.count()), nb = static_cast<double>(wb.count());
  const double va = wa.variance() / na, vb = wb.variance() / nb;

  WelchResult r;
  r.mean_a = wa.mean();
  r.mean_b = wb.mean();
  r.mean_diff = wa.mean() - wb.mean();
  double se2 = va + vb;
  if (se2 <= 0.0) {
    // Two exactly constant samples: the difference carries no sampling error.
    r.ci_lo = r.ci_hi = r.mean_diff;
    r.dof = na + nb - 2.0;
    r.t_stat = r.mean_diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.p_value = r.mean_diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  double se = std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.t_stat = r.mean_diff / se;
  double tq = student_t_quantile(0.5 + confidence / 2.0, r.dof);
  r.ci_lo = r.mean_diff - tq * se;
  r.ci_hi = r.mean_diff + tq * se;
  r.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(r.t_stat), r.dof));
  return r;
}

// Pearson chi-square goodness-of-fit p-value for observed counts against
// expected probabilities. Zero-probability bins must carry zero observations.
inline double chi_square_p_value(const std::vector<long long>& observed,
                                 const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size() || observed.size() < 2)
    throw ConfigError("chi_square_p_value needs matching bins (>= 2)");
  long long total = 0;
  for (long long o : observed) total += o;
  if (total <= 0) throw ConfigError("chi_square_p_value needs a positive sample count");

  double stat = 0.0;
  int dof = -1;  // bins - 1
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = expected_prob[i] * static_cast<double>(total);
    if (expected_prob[i] <= 0.0) {
      if (observed[i] != 0)
        throw ConfigError("observed mass in a zero-probability bin");
      continue;
    }
    ++dof;
    double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
  }
  if (dof <= 0) return 1.0;
  return 1.0 - incomplete_gamma_p(dof / 2.0, stat / 2.0);
}

}  // namespace averl

#endif  // AVERL_STATS_HPP
