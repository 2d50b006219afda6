#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace bgp {

struct NelderMeadOptions {
  int max_evaluations = 300;
  double f_tolerance = 1e-9;
  double x_tolerance = 1e-7;
  double initial_step = 0.5;  // in parameter units, clipped to the box
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Minimizes f over the box [lo, hi] with a Nelder-Mead simplex whose
/// trial points are clamped into the box. Non-finite objective values are
/// treated as +inf.
template <class F>
NelderMeadResult nelder_mead_box(F&& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, const NelderMeadOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  auto clamp = [&](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(lo).cwiseMin(hi)); };
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& v) {
    ++evals;
    const double r = f(v);
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.push_back(clamp(std::move(x0)));
  values.push_back(eval(simplex[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex[0];
    const double room_up = hi[i] - v[i];
    v[i] += room_up >= opts.initial_step ? opts.initial_step : -opts.initial_step;
    simplex.push_back(clamp(v));
    values.push_back(eval(simplex.back()));
  }

  std::vector<std::size_t> order(n + 1);
  while (evals < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i : order) diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    if (std::abs(values[worst] - values[best]) <= opts.f_tolerance * (1.0 + std::abs(values[best])) &&
        diameter <= opts.x_tolerance) {
      break;
    }
    if (diameter <= opts.x_tolerance * 1e-3) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i : order) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp(centroid + (centroid - simplex[worst]));
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? clamp(centroid + 0.5 * (reflected - centroid))
                : clamp(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i : order) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto it = std::min_element(values.begin(), values.end());
  NelderMeadResult out;
  out.x = simplex[static_cast<std::size_t>(it - values.begin())];
  out.value = *it;
  out.evaluations = evals;
  return out;
}

}  // namespace bgp
