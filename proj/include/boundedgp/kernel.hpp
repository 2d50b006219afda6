#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace bgp {

enum class KernelFamily { squared_exponential, matern52 };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::squared_exponential: return "squared-exponential";
    case KernelFamily::matern52: return "matern-5/2";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  if (s == "squared-exponential" || s == "se" || s == "rbf") return KernelFamily::squared_exponential;
  if (s == "matern-5/2" || s == "matern52") return KernelFamily::matern52;
  throw UnsupportedKernel("unknown kernel family '" + std::string(s) + "'");
}

/// Stationary covariance on the unit cube plus the observation noise.
///
/// With `ard == false` every entry of `lengthscales` is kept equal and the
/// hyperparameter search treats them as one parameter.
struct KernelConfig {
  KernelFamily family = KernelFamily::squared_exponential;
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  bool ard = false;

  static KernelConfig isotropic(int d, double lengthscale, double signal_variance = 1.0,
                                double noise_variance = 1e-6,
                                KernelFamily family = KernelFamily::squared_exponential) {
    KernelConfig k;
    k.family = family;
    k.lengthscales = Eigen::VectorXd::Constant(d, lengthscale);
    k.signal_variance = signal_variance;
    k.noise_variance = noise_variance;
    return k;
  }

  int dim() const { return static_cast<int>(lengthscales.size()); }

  void validate(int d) const {
    if (lengthscales.size() != d) {
      throw DimensionMismatch("kernel has " + std::to_string(lengthscales.size()) +
                              " lengthscales, data has dimension " + std::to_string(d));
    }
    if ((lengthscales.array() <= 0.0).any() || !lengthscales.allFinite()) {
      throw InvalidArgument("kernel lengthscales must be positive");
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
      throw InvalidArgument("kernel signal variance must be positive");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
      throw InvalidArgument("noise variance must be nonnegative");
    }
  }

  template <class A, class B>
  double scaled_sq_dist(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      const double t = (a.coeff(i) - b.coeff(i)) / lengthscales[i];
      r2 += t * t;
    }
    return r2;
  }

  template <class A, class B>
  double operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    const double r2 = scaled_sq_dist(a, b);
    switch (family) {
      case KernelFamily::squared_exponential:
        return signal_variance * std::exp(-0.5 * r2);
      case KernelFamily::matern52: {
        const double s5r = std::sqrt(5.0 * r2);
        return signal_variance * (1.0 + s5r + 5.0 * r2 / 3.0) * std::exp(-s5r);
      }
    }
    return 0.0;
  }

  /// Gradient of k(a, b) with respect to a, accumulated as grad += scale * dk/da.
  template <class A, class B>
  double accumulate_gradient(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                             double scale, Eigen::Ref<Eigen::VectorXd> grad) const {
    const double r2 = scaled_sq_dist(a, b);
    double k = 0.0;
    double coef = 0.0;  // dk/da_i = coef * (a_i - b_i) / l_i^2
    switch (family) {
      case KernelFamily::squared_exponential:
        k = signal_variance * std::exp(-0.5 * r2);
        coef = -k;
        break;
      case KernelFamily::matern52: {
        const double s5r = std::sqrt(5.0 * r2);
        const double e = std::exp(-s5r);
        k = signal_variance * (1.0 + s5r + 5.0 * r2 / 3.0) * e;
        coef = -(5.0 / 3.0) * signal_variance * (1.0 + s5r) * e;
        break;
      }
    }
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      const double l = lengthscales[i];
      grad[i] += scale * coef * (a.coeff(i) - b.coeff(i)) / (l * l);
    }
    return k;
  }

  Eigen::MatrixXd gram(const Eigen::MatrixXd& X) const {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, i) = signal_variance;
      for (Eigen::Index j = 0; j < i; ++j) {
        K(i, j) = K(j, i) = (*this)(X.row(i), X.row(j));
      }
    }
    return K;
  }

  Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = (*this)(A.row(i), B.row(j));
    }
    return K;
  }

  /// k(X_i, x) for every row of X.
  template <class V>
  Eigen::VectorXd column(const Eigen::MatrixXd& X, const Eigen::MatrixBase<V>& x) const {
    Eigen::VectorXd k(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) k[i] = (*this)(X.row(i), x);
    return k;
  }
};

}  // namespace bgp
