#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "nelder_mead.hpp"
#include "stats.hpp"

namespace bgp {

/// Whether a GP models the objective directly or a warped latent function.
enum class OutputSpace { f, h };

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Relative jitter schedule: 1e-8 .. 1e-2 times the mean kernel diagonal.
inline constexpr double kJitterStart = 1e-8;
inline constexpr double kJitterMax = 1e-2;

/// Posterior variance below this at a pending point makes the rank-one update ill-posed.
inline constexpr double kPendingVarianceTolerance = 1e-14;

namespace detail {

struct Factorization {
  Eigen::MatrixXd L;
  double jitter = 0.0;
};

/// Cholesky of K + noise*I + jitter*I, escalating jitter by x10 on failure.
inline std::optional<Factorization> try_factor(const Eigen::MatrixXd& K, double noise) {
  const Eigen::Index n = K.rows();
  if (n == 0) return Factorization{Eigen::MatrixXd(0, 0), 0.0};
  const double scale = K.diagonal().mean();
  for (double rel = kJitterStart; rel <= kJitterMax * 1.0000001; rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    if ((L.diagonal().array() <= 0.0).any() || !L.allFinite()) continue;
    return Factorization{std::move(L), jitter};
  }
  return std::nullopt;
}

inline Factorization factor_or_throw(const Eigen::MatrixXd& K, double noise) {
  auto f = try_factor(K, noise);
  if (!f) {
    const double tried = kJitterMax * (K.rows() > 0 ? K.diagonal().mean() : 1.0);
    throw FactorizationError("Cholesky of K + noise*I failed after jitter escalation up to " +
                                 std::to_string(tried),
                             tried);
  }
  return std::move(*f);
}

}  // namespace detail

/// Exact GP posterior over a fixed dataset. Immutable after construction.
class FittedGP {
 public:
  FittedGP(Dataset data, KernelConfig kernel, double prior_mean = 0.0,
           OutputSpace space = OutputSpace::f)
      : data_(std::move(data)), kernel_(std::move(kernel)), prior_mean_(prior_mean), space_(space) {
    data_.validate();
    kernel_.validate(data_.dim());
    auto fac = detail::factor_or_throw(kernel_.gram(data_.X), kernel_.noise_variance);
    L_ = std::move(fac.L);
    jitter_ = fac.jitter;
    alpha_ = solve((data_.y.array() - prior_mean_).matrix());
  }

  const Dataset& dataset() const { return data_; }
  const KernelConfig& kernel() const { return kernel_; }
  /// Lower-triangular factor of K + noise*I + jitter*I.
  const Eigen::MatrixXd& chol() const { return L_; }
  /// (K + noise*I)^{-1} (y - m).
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  OutputSpace space() const { return space_; }
  int size() const { return data_.size(); }
  int dim() const { return data_.dim(); }
  double effective_noise() const { return kernel_.noise_variance + jitter_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() == 0) return rhs;
    Eigen::VectorXd z = L_.triangularView<Eigen::Lower>().solve(rhs);
    return L_.transpose().triangularView<Eigen::Upper>().solve(z);
  }

  /// L^{-1} v.
  Eigen::VectorXd whiten(const Eigen::VectorXd& v) const {
    if (v.size() == 0) return v;
    return L_.triangularView<Eigen::Lower>().solve(v);
  }

  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const {
    check_point(x);
    return kernel_.column(data_.X, x);
  }

  Prediction posterior(const Eigen::VectorXd& x) const {
    check_point(x);
    const double kxx = kernel_(x, x);
    if (size() == 0) return {prior_mean_, kxx};
    const Eigen::VectorXd k = kernel_.column(data_.X, x);
    const Eigen::VectorXd v = whiten(k);
    const double var = std::clamp(kxx - v.squaredNorm(), 0.0, kxx);
    return {prior_mean_ + k.dot(alpha_), var};
  }

  /// Posterior covariance between two inputs.
  double covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    check_point(a);
    check_point(b);
    const double kab = kernel_(a, b);
    if (size() == 0) return kab;
    return kab - whiten(kernel_.column(data_.X, a)).dot(whiten(kernel_.column(data_.X, b)));
  }

  /// Posterior mean and its gradient with respect to x.
  double mean_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    check_point(x);
    grad = Eigen::VectorXd::Zero(dim());
    double mu = prior_mean_;
    for (int j = 0; j < size(); ++j) {
      mu += kernel_.accumulate_gradient(x, data_.X.row(j), alpha_[j], grad) * alpha_[j];
    }
    return mu;
  }

  double log_marginal_likelihood() const {
    const int n = size();
    if (n == 0) return 0.0;
    const Eigen::VectorXd r = (data_.y.array() - prior_mean_).matrix();
    const double value = -0.5 * r.dot(alpha_) - L_.diagonal().array().log().sum() -
                         0.5 * n * kLogTwoPi;
    if (!std::isfinite(value)) throw NumericError("log marginal likelihood is not finite");
    return value;
  }

  /// Posterior variance at x_query after appending x_pending (observed with
  /// the model's noise) to the training set, via the rank-one block update
  /// of the inverse covariance. No refactorization.
  double extended_variance(const Eigen::VectorXd& x_pending, const Eigen::VectorXd& x_query) const {
    check_point(x_pending);
    check_point(x_query);
    const double kpp = kernel_(x_pending, x_pending);
    const double kqq = kernel_(x_query, x_query);
    const double kpq = kernel_(x_pending, x_query);
    double var_p = kpp, var_q = kqq, cov = kpq;
    if (size() > 0) {
      const Eigen::VectorXd vp = whiten(kernel_.column(data_.X, x_pending));
      const Eigen::VectorXd vq = whiten(kernel_.column(data_.X, x_query));
      var_p = kpp - vp.squaredNorm();
      var_q = kqq - vq.squaredNorm();
      cov = kpq - vp.dot(vq);
    }
    if (var_p < kPendingVarianceTolerance) {
      throw DegeneratePendingPoint("posterior variance at pending point is " +
                                   std::to_string(var_p) + ", below tolerance");
    }
    var_q = std::max(var_q, 0.0);
    const double schur = var_p + effective_noise();
    return std::clamp(var_q - cov * cov / schur, 0.0, var_q);
  }

 private:
  void check_point(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
      throw DimensionMismatch("point has dimension " + std::to_string(x.size()) +
                              ", model has dimension " + std::to_string(dim()));
    }
  }

  Dataset data_;
  KernelConfig kernel_;
  double prior_mean_ = 0.0;
  OutputSpace space_ = OutputSpace::f;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Inverse of [[A, b], [b^T, c]] from A^{-1} via the block-wise inversion lemma.
inline Eigen::MatrixXd block_inverse_append(const Eigen::MatrixXd& A_inv, const Eigen::VectorXd& b,
                                            double c) {
  const Eigen::Index n = A_inv.rows();
  if (b.size() != n) throw DimensionMismatch("block_inverse_append: b has wrong length");
  const Eigen::VectorXd Ab = A_inv * b;
  const double schur = c - b.dot(Ab);
  if (!(schur > 0.0)) throw DegeneratePendingPoint("block_inverse_append: Schur complement <= 0");
  Eigen::MatrixXd out(n + 1, n + 1);
  out.topLeftCorner(n, n) = A_inv + Ab * Ab.transpose() / schur;
  out.topRightCorner(n, 1) = -Ab / schur;
  out.bottomLeftCorner(1, n) = -Ab.transpose() / schur;
  out(n, n) = 1.0 / schur;
  return out;
}

struct FitOptions {
  bool optimize_hypers = false;
  std::uint64_t seed = 0;
  int restarts = 8;
  int evaluations_per_start = 200;
  double prior_mean = 0.0;
  OutputSpace space = OutputSpace::f;
};

/// Search box on log10 hyperparameters.
struct HyperBox {
  double log10_lengthscale_lo = -3.0, log10_lengthscale_hi = 2.0;
  double log10_signal_lo = -3.0, log10_signal_hi = 2.0;
  double log10_noise_lo = -6.0, log10_noise_hi = 0.0;
};

namespace detail {

/// Negative log marginal likelihood as a function of log10 hyperparameters,
/// reusing per-dimension squared differences across evaluations.
class EvidenceObjective {
 public:
  EvidenceObjective(const Dataset& data, const KernelConfig& base, double prior_mean)
      : base_(base), n_(data.size()), d_(data.dim()), r_((data.y.array() - prior_mean).matrix()) {
    diffs_.reserve(static_cast<std::size_t>(d_));
    for (int k = 0; k < d_; ++k) {
      Eigen::MatrixXd D(n_, n_);
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
          const double t = data.X(i, k) - data.X(j, k);
          D(i, j) = t * t;
        }
      }
      diffs_.push_back(std::move(D));
    }
  }

  int n_lengthscales() const { return base_.ard ? d_ : 1; }

  KernelConfig decode(const Eigen::VectorXd& theta) const {
    KernelConfig k = base_;
    const int nl = n_lengthscales();
    for (int i = 0; i < d_; ++i) k.lengthscales[i] = std::pow(10.0, theta[nl == 1 ? 0 : i]);
    k.signal_variance = std::pow(10.0, theta[nl]);
    k.noise_variance = std::pow(10.0, theta[nl + 1]);
    return k;
  }

  static Eigen::VectorXd encode(const KernelConfig& k) {
    const int nl = k.ard ? k.dim() : 1;
    Eigen::VectorXd theta(nl + 2);
    if (k.ard) {
      for (int i = 0; i < nl; ++i) theta[i] = std::log10(k.lengthscales[i]);
    } else {
      theta[0] = k.lengthscales.array().log10().mean();
    }
    theta[nl] = std::log10(k.signal_variance);
    theta[nl + 1] = std::log10(std::max(k.noise_variance, 1e-300));
    return theta;
  }

  double negative_lml(const KernelConfig& k) const {
    Eigen::MatrixXd R2 = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < d_; ++i) R2 += diffs_[static_cast<std::size_t>(i)] / (k.lengthscales[i] * k.lengthscales[i]);
    Eigen::MatrixXd K(n_, n_);
    switch (k.family) {
      case KernelFamily::squared_exponential:
        K = k.signal_variance * (-0.5 * R2.array()).exp().matrix();
        break;
      case KernelFamily::matern52: {
        const Eigen::ArrayXXd s = (5.0 * R2.array()).sqrt();
        K = (k.signal_variance * (1.0 + s + s.square() / 3.0) * (-s).exp()).matrix();
        break;
      }
    }
    auto fac = try_factor(K, k.noise_variance);
    if (!fac) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd z = fac->L.triangularView<Eigen::Lower>().solve(r_);
    return 0.5 * z.squaredNorm() + fac->L.diagonal().array().log().sum() + 0.5 * n_ * kLogTwoPi;
  }

  double operator()(const Eigen::VectorXd& theta) const { return negative_lml(decode(theta)); }

 private:
  KernelConfig base_;
  int n_, d_;
  Eigen::VectorXd r_;
  std::vector<Eigen::MatrixXd> diffs_;
};

}  // namespace detail

/// Fits a GP. With `optimize_hypers`, lengthscales, signal and noise variance
/// maximize the log marginal likelihood over a box in log10 space, using the
/// initial config plus `restarts` random starts. The result never has lower
/// evidence than the initial config.
inline FittedGP fit_gp(const Dataset& data, const KernelConfig& config,
                       const FitOptions& options = {}, const HyperBox& box = {}) {
  data.validate();
  if (data.size() < 1) throw InvalidArgument("fit_gp requires at least one observation");
  config.validate(data.dim());
  if (!options.optimize_hypers) {
    return FittedGP(data, config, options.prior_mean, options.space);
  }

  const detail::EvidenceObjective objective(data, config, options.prior_mean);
  const int nl = objective.n_lengthscales();
  Eigen::VectorXd lo(nl + 2), hi(nl + 2);
  lo.head(nl).setConstant(box.log10_lengthscale_lo);
  hi.head(nl).setConstant(box.log10_lengthscale_hi);
  lo[nl] = box.log10_signal_lo;
  hi[nl] = box.log10_signal_hi;
  lo[nl + 1] = box.log10_noise_lo;
  hi[nl + 1] = box.log10_noise_hi;

  KernelConfig best = config;
  double best_value = objective.negative_lml(config);

  Rng rng(mix_seed(options.seed, 0x6170));
  NelderMeadOptions nm;
  nm.max_evaluations = options.evaluations_per_start;
  for (int s = 0; s <= options.restarts; ++s) {
    Eigen::VectorXd start(nl + 2);
    if (s == 0) {
      start = detail::EvidenceObjective::encode(config);
    } else {
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] = lo[i] + (hi[i] - lo[i]) * uniform01(rng);
    }
    const NelderMeadResult r = nelder_mead_box(objective, start, lo, hi, nm);
    if (r.value < best_value) {
      best_value = r.value;
      best = objective.decode(r.x);
    }
  }
  return FittedGP(data, best, options.prior_mean, options.space);
}

/// A GP conditioned on no data.
inline FittedGP prior_gp(int d, const KernelConfig& config, double prior_mean = 0.0,
                         OutputSpace space = OutputSpace::f) {
  return FittedGP(Dataset::empty(d), config, prior_mean, space);
}

}  // namespace bgp
