#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace bgp {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

inline double normal_logpdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance)) - 0.5 * r * r / variance;
}

inline double normal_pdf(double x, double mean, double variance) {
  return std::exp(normal_logpdf(x, mean, variance));
}

inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Standard normal quantile by bisection on the CDF.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) return p <= 0.0 ? -std::numeric_limits<double>::infinity()
                                             : std::numeric_limits<double>::infinity();
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased (n - 1) sample variance; NaN for fewer than two values.
inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double sample_std(std::span<const double> v) {
  return std::sqrt(sample_variance(v));
}

inline double median_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> c(v.begin(), v.end());
  std::sort(c.begin(), c.end());
  const std::size_t n = c.size();
  return n % 2 == 1 ? c[n / 2] : 0.5 * (c[n / 2 - 1] + c[n / 2]);
}

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// std::normal_distribution is implementation-defined; these keep streams
// reproducible across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  // Box-Muller on (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double chi_squared(Rng& rng, int dof) {
  double s = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double z = standard_normal(rng);
    s += z * z;
  }
  return s;
}

}  // namespace bgp
