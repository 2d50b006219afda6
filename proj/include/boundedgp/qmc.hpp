#pragma once

#include <Eigen/Core>
#include <iterator>
#include <string>

#include "errors.hpp"
#include "stats.hpp"

namespace bgp {

namespace detail {

inline constexpr int kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                        37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                        83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

inline double radical_inverse(std::uint64_t index, int base) {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace detail

/// n Halton points in [0,1)^d, starting at sequence index `skip`
/// (index 0 is the origin, so the default skips it).
inline Eigen::MatrixXd halton_points(int n, int d, std::uint64_t skip = 1) {
  if (d < 1 || d > static_cast<int>(std::size(detail::kHaltonPrimes))) {
    throw InvalidArgument("halton_points: unsupported dimension " + std::to_string(d));
  }
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      pts(i, j) = detail::radical_inverse(skip + static_cast<std::uint64_t>(i),
                                          detail::kHaltonPrimes[j]);
    }
  }
  return pts;
}

/// Halton points with a Cranley-Patterson random shift (mod 1).
inline Eigen::MatrixXd shifted_halton_points(int n, int d, Rng& rng) {
  Eigen::MatrixXd pts = halton_points(n, d);
  for (int j = 0; j < d; ++j) {
    const double shift = uniform01(rng);
    for (int i = 0; i < n; ++i) {
      double v = pts(i, j) + shift;
      pts(i, j) = v >= 1.0 ? v - 1.0 : v;
    }
  }
  return pts;
}

}  // namespace bgp
