#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace bgp {

struct LocalSearchOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;  // on the projected gradient
  double initial_step = 0.1;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct LocalSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline Eigen::VectorXd project_unit_box(const Eigen::VectorXd& x) {
  return x.cwiseMax(0.0).cwiseMin(1.0);
}

/// Projected gradient ascent on [0,1]^d with Armijo backtracking.
/// `f(x, grad)` returns the value and writes the gradient.
///
/// `converged` is false only when the iteration budget runs out with the
/// projected gradient still above tolerance; the last iterate is returned.
template <class F>
LocalSearchResult projected_ascent(F&& f, const Eigen::VectorXd& x0, const LocalSearchOptions& opts = {}) {
  LocalSearchResult res;
  res.x = project_unit_box(x0);
  Eigen::VectorXd grad(x0.size());
  res.value = f(res.x, grad);
  double step = opts.initial_step;
  Eigen::VectorXd trial_grad(x0.size());

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;
    const Eigen::VectorXd pg = project_unit_box(res.x + grad) - res.x;
    if (pg.norm() <= opts.gradient_tolerance) {
      res.converged = true;
      return res;
    }
    bool moved = false;
    double t = step;
    for (int b = 0; b < opts.max_backtracks; ++b, t *= 0.5) {
      const Eigen::VectorXd trial = project_unit_box(res.x + t * grad);
      const Eigen::VectorXd delta = trial - res.x;
      if (delta.squaredNorm() == 0.0) break;
      const double v = f(trial, trial_grad);
      if (std::isfinite(v) && v >= res.value + opts.armijo * grad.dot(delta)) {
        res.x = trial;
        res.value = v;
        grad = trial_grad;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // No ascent step of any size: stationary to working precision.
      res.converged = true;
      return res;
    }
    step = std::min(2.0 * t, 1e3);
  }
  res.iterations = opts.max_iterations;
  const Eigen::VectorXd pg = project_unit_box(res.x + grad) - res.x;
  res.converged = pg.norm() <= opts.gradient_tolerance;
  return res;
}

/// Central finite-difference gradient, with one-sided steps at the box faces.
template <class F>
Eigen::VectorXd finite_difference_gradient(F&& f, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] = std::min(1.0, x[i] + h);
    b[i] = std::max(0.0, x[i] - h);
    g[i] = (f(a) - f(b)) / (a[i] - b[i]);
  }
  return g;
}

}  // namespace bgp
