#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace switchsim {

/// P(X <= E[X] - x) <= exp(-x^2 / (2 E[X])) for a binomial X.
inline double chernoff_lower(double mean, double x) {
  if (!(mean > 0.0) || !(x > 0.0)) {
    throw std::invalid_argument("chernoff_lower needs positive mean and deviation");
  }
  return std::exp(-x * x / (2.0 * mean));
}

/// P(X >= E[X] + x) <= exp(-x^2 / (2 (E[X] + x/3))) for a binomial X.
inline double chernoff_upper(double mean, double x) {
  if (!(mean > 0.0) || !(x > 0.0)) {
    throw std::invalid_argument("chernoff_upper needs positive mean and deviation");
  }
  return std::exp(-x * x / (2.0 * (mean + x / 3.0)));
}

/// Discrete-time G/G/1 parameters: per-slot arrival/service means and second
/// moments.
struct GG1Params {
  double lambda = 0.0;  // E[X]
  double m2x = 0.0;     // E[X^2]
  double mu = 0.0;      // E[Y]
  double m2y = 0.0;     // E[Y^2]
};

/// Kingman-style bound on E[Z(tau)] for the recursion
/// Z(tau+1) = max{0, Z(tau) + X(tau) - Y(tau)} started empty.
inline double kingman_bound(const GG1Params& p) {
  if (!(p.lambda < p.mu)) {
    throw std::invalid_argument("unstable system: arrival rate >= service rate");
  }
  return (p.m2x + p.m2y - 2.0 * p.lambda * p.mu) / (2.0 * (p.mu - p.lambda));
}

/// One step of the queue recursion above.
inline double lindley_step(double z, double x, double y) {
  return std::max(0.0, z + x - y);
}

inline std::int64_t lindley_step(std::int64_t z, std::int64_t x,
                                 std::int64_t y) {
  return std::max<std::int64_t>(0, z + x - y);
}

/// Expected-total-queue bound 3 n d for the three-phase policy.
inline std::int64_t total_queue_bound(std::int64_t n, std::int64_t d) {
  if (n < 1 || d < 1) throw std::invalid_argument("need n >= 1 and d >= 1");
  return 3 * n * d;
}

/// Scaling envelope c * n^1.5 * f_n * ln(f_n). Returns 0 for f_n == 1, where
/// the logarithm degenerates.
inline double theorem1_envelope(std::int64_t n, std::int64_t f_n, double c) {
  if (n < 1 || f_n < n || !(c > 0.0)) {
    throw std::invalid_argument("need n >= 1, f_n >= n, c > 0");
  }
  if (f_n == 1) return 0.0;
  const double nd = static_cast<double>(n);
  return c * nd * std::sqrt(nd) * static_cast<double>(f_n) *
         std::log(static_cast<double>(f_n));
}

}  // namespace switchsim
