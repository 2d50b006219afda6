#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "errors.hpp"
#include "stats.hpp"

namespace bgp {

/// A synthetic objective on a canonical box, exposed on [0,1]^d in
/// maximization form: minimization problems are negated, so `f_max` is the
/// negated original minimum and `f_min` the negated original maximum.
struct BenchmarkFunction {
  std::string name;
  int d = 0;
  Eigen::VectorXd lo, hi;  // canonical box
  std::function<double(const Eigen::VectorXd&)> formula;  // original units and coordinates
  double original_min = 0.0;
  double original_max = 0.0;
  Eigen::VectorXd argmin;  // canonical coordinates
  Eigen::VectorXd argmax;

  Eigen::VectorXd to_box(const Eigen::VectorXd& u) const {
    if (u.size() != d) throw DimensionMismatch(name + ": expected dimension " + std::to_string(d));
    return lo + (hi - lo).cwiseProduct(u);
  }
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const {
    return (x - lo).cwiseQuotient(hi - lo);
  }

  /// Formula value at a unit-cube point.
  double original(const Eigen::VectorXd& u) const { return formula(to_box(u)); }
  /// Maximization-form value at a unit-cube point.
  double evaluate(const Eigen::VectorXd& u) const { return -original(u); }

  double f_max() const { return -original_min; }
  double f_min() const { return -original_max; }
  Eigen::VectorXd maximizer_unit() const { return to_unit(argmin); }
  Eigen::VectorXd minimizer_unit() const { return to_unit(argmax); }
};

namespace detail {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double forrester(const Eigen::VectorXd& x) {
  const double t = 6.0 * x[0] - 2.0;
  return t * t * std::sin(12.0 * x[0] - 4.0);
}

inline double branin(const Eigen::VectorXd& x) {
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, r = 6.0, s = 10.0, t = 1.0 / (8.0 * pi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return u * u + s * (1.0 - t) * std::cos(x[0]) + s;
}

inline double rosenbrock(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    s += 100.0 * a * a + (1.0 - x[i]) * (1.0 - x[i]);
  }
  return s;
}

inline double mccormick(const Eigen::VectorXd& x) {
  return std::sin(x[0] + x[1]) + (x[0] - x[1]) * (x[0] - x[1]) - 1.5 * x[0] + 2.5 * x[1] + 1.0;
}

inline double six_hump_camel(const Eigen::VectorXd& x) {
  const double a = x[0] * x[0], b = x[1] * x[1];
  return (4.0 - 2.1 * a + a * a / 3.0) * a + x[0] * x[1] + (-4.0 + 4.0 * b) * b;
}

inline constexpr double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};

inline double hartmann3(const Eigen::VectorXd& x) {
  static const double A[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static const double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                 {0.4699, 0.4387, 0.7470},
                                 {0.1091, 0.8732, 0.5547},
                                 {0.0381, 0.5743, 0.8828}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j) e += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-e);
  }
  return -s;
}

inline double hartmann6(const Eigen::VectorXd& x) {
  static const double A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                 {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                 {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                 {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
  static const double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                 {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                 {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                 {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) e += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-e);
  }
  return -s;
}

inline double alpine1(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::abs(x[i] * std::sin(x[i]) + 0.1 * x[i]);
  return s;
}

/// Sobol g-function coefficient a_i = (i - 1) / 2 for 1-based i.
inline double gsobol_coefficient(Eigen::Index i) { return static_cast<double>(i) / 2.0; }

inline double gsobol(const Eigen::VectorXd& x) {
  double p = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = gsobol_coefficient(i);
    p *= (std::abs(4.0 * x[i] - 2.0) + a) / (1.0 + a);
  }
  return p;
}

// Per-coordinate maximizer of |x sin x + 0.1 x| on [-10, 10].
inline constexpr double kAlpineArgmax = 7.990894599261857;

}  // namespace detail

inline std::vector<std::string> benchmark_names() {
  return {"forrester", "branin",   "rosenbrock", "mccormick", "six-hump-camel",
          "hartmann3", "hartmann6", "alpine1",   "gsobol"};
}

/// Canonical name for accepted aliases.
inline std::string canonical_benchmark_name(const std::string& name) {
  if (name == "sixhumpcamel" || name == "camel" || name == "six_hump_camel") return "six-hump-camel";
  if (name == "hartmann" || name == "hartmann-3") return "hartmann3";
  if (name == "hartmann-6") return "hartmann6";
  if (name == "alpine" || name == "alpine1-5d" || name == "alpine1_5d") return "alpine1";
  if (name == "gsobol-5d" || name == "g-sobol") return "gsobol";
  return name;
}

/// Optima were certified offline by dense random search plus bounded
/// quasi-Newton refinement and corner enumeration.
inline BenchmarkFunction make_benchmark(const std::string& requested) {
  using detail::vec;
  const std::string name = canonical_benchmark_name(requested);
  BenchmarkFunction f;
  f.name = name;
  if (name == "forrester") {
    f.d = 1;
    f.lo = vec({0.0});
    f.hi = vec({1.0});
    f.formula = detail::forrester;
    f.argmin = vec({0.7572487579974087});
    f.argmax = vec({1.0});
  } else if (name == "branin") {
    f.d = 2;
    f.lo = vec({-5.0, 0.0});
    f.hi = vec({10.0, 15.0});
    f.formula = detail::branin;
    f.argmin = vec({-std::numbers::pi, 12.275});
    f.argmax = vec({-5.0, 0.0});
  } else if (name == "rosenbrock") {
    f.d = 2;
    f.lo = vec({-2.048, -2.048});
    f.hi = vec({2.048, 2.048});
    f.formula = detail::rosenbrock;
    f.argmin = vec({1.0, 1.0});
    f.argmax = vec({-2.048, -2.048});
  } else if (name == "mccormick") {
    f.d = 2;
    f.lo = vec({-1.5, -3.0});
    f.hi = vec({4.0, 4.0});
    f.formula = detail::mccormick;
    f.argmin = vec({-0.5471975511302813, -1.5471975567507772});
    f.argmax = vec({-1.5, 4.0});
  } else if (name == "six-hump-camel") {
    f.d = 2;
    f.lo = vec({-3.0, -2.0});
    f.hi = vec({3.0, 2.0});
    f.formula = detail::six_hump_camel;
    f.argmin = vec({0.08984200897644164, -0.7126564073581516});
    f.argmax = vec({-3.0, -2.0});
  } else if (name == "hartmann3") {
    f.d = 3;
    f.lo = Eigen::VectorXd::Zero(3);
    f.hi = Eigen::VectorXd::Ones(3);
    f.formula = detail::hartmann3;
    f.argmin = vec({0.11458886868684981, 0.5556488944257764, 0.8525469860957188});
    f.argmax = vec({1.0, 1.0, 0.0});
  } else if (name == "hartmann6") {
    f.d = 6;
    f.lo = Eigen::VectorXd::Zero(6);
    f.hi = Eigen::VectorXd::Ones(6);
    f.formula = detail::hartmann6;
    f.argmin = vec({0.20168950575603897, 0.15001068836068612, 0.4768739799249104, 0.27533242768185073,
                    0.31165161274172837, 0.6573005321050609});
    f.argmax = vec({1.0, 1.0, 0.0, 1.0, 1.0, 1.0});
  } else if (name == "alpine1") {
    f.d = 5;
    f.lo = Eigen::VectorXd::Constant(5, -10.0);
    f.hi = Eigen::VectorXd::Constant(5, 10.0);
    f.formula = detail::alpine1;
    f.argmin = Eigen::VectorXd::Zero(5);
    f.argmax = Eigen::VectorXd::Constant(5, detail::kAlpineArgmax);
  } else if (name == "gsobol") {
    f.d = 5;
    f.lo = Eigen::VectorXd::Zero(5);
    f.hi = Eigen::VectorXd::Ones(5);
    f.formula = detail::gsobol;
    f.argmin = vec({0.5, 0.5, 0.5, 0.5, 0.5});
    f.argmax = Eigen::VectorXd::Zero(5);
  } else {
    throw UnknownBenchmark("unknown benchmark '" + requested + "'");
  }
  f.original_min = f.formula(f.argmin);
  f.original_max = f.formula(f.argmax);
  return f;
}

/// Objective extrema in the standardized output space of a dataset.
struct StandardizedOptima {
  double f_max = 0.0;
  double f_min = 0.0;
};

inline StandardizedOptima true_bounds(const BenchmarkFunction& f, double y_mean, double y_std) {
  if (!(y_std > 0.0)) throw InvalidArgument("true_bounds: y_std must be positive");
  return {(f.f_max() - y_mean) / y_std, (f.f_min() - y_mean) / y_std};
}

/// Looseness used when the misspecification magnitude is zero.
struct Looseness {
  double eta_plus_sq = 0.02;
  double eta_minus_sq = 0.5;
  static Looseness defaults(int d) { return {0.02 * d, 0.5 * d}; }
};

/// Signs of the misspecification offsets, one fair coin per bound.
struct MisspecSigns {
  double upper = 1.0;
  double lower = 1.0;
  static MisspecSigns draw(Rng& rng) {
    MisspecSigns s;
    s.upper = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    s.lower = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    return s;
  }
};

inline ApproxBounds misspecify(const StandardizedOptima& truth, double eta_sq, const MisspecSigns& signs,
                               const Looseness& fallback) {
  if (!(eta_sq >= 0.0)) throw InvalidArgument("misspecify: eta_sq must be nonnegative");
  ApproxBounds b;
  b.f_plus = truth.f_max + signs.upper * eta_sq;
  b.f_minus = truth.f_min + signs.lower * eta_sq;
  // Two inward shifts can cross when eta_sq exceeds half the range; the lower bound then moves outward.
  if (!(*b.f_plus > *b.f_minus)) b.f_minus = truth.f_min - eta_sq;
  b.eta_plus_sq = eta_sq > 0.0 ? eta_sq : fallback.eta_plus_sq;
  b.eta_minus_sq = eta_sq > 0.0 ? eta_sq : fallback.eta_minus_sq;
  b.validate();
  return b;
}

/// f_plus = f_max +/- eta_sq, f_minus = f_min +/- eta_sq with independent fair-coin signs.
inline ApproxBounds misspecify(const StandardizedOptima& truth, double eta_sq, Rng& rng,
                               const Looseness& fallback = {}) {
  return misspecify(truth, eta_sq, MisspecSigns::draw(rng), fallback);
}

/// Adds iid Gaussian noise with the given standard deviation.
inline Eigen::VectorXd add_noise(const Eigen::VectorXd& y, double noise_std, Rng& rng) {
  Eigen::VectorXd out = y;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += noise_std * standard_normal(rng);
  return out;
}

}  // namespace bgp
