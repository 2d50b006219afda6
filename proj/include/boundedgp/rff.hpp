#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "gp.hpp"
#include "kernel.hpp"
#include "local_search.hpp"
#include "qmc.hpp"
#include "stats.hpp"
#include "transform.hpp"

namespace bgp {

inline constexpr int kDefaultFeatures = 100;

/// Random Fourier features phi_i(x) = amplitude * sqrt(2/l) * cos(theta_i . x + tau_i).
struct FourierBasis {
  Eigen::MatrixXd thetas;  // l x d
  Eigen::VectorXd taus;    // l, in [0, 2 pi)
  double amplitude = 1.0;

  int size() const { return static_cast<int>(thetas.rows()); }
  int dim() const { return static_cast<int>(thetas.cols()); }
  double feature_scale() const { return amplitude * std::sqrt(2.0 / size()); }

  Eigen::VectorXd features(const Eigen::VectorXd& x) const {
    return feature_scale() * ((thetas * x + taus).array().cos()).matrix();
  }

  /// n x l feature matrix for the rows of P.
  Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& P) const {
    Eigen::MatrixXd A = P * thetas.transpose();
    A.rowwise() += taus.transpose();
    return feature_scale() * A.array().cos().matrix();
  }
};

inline FourierBasis draw_basis(const KernelConfig& kernel, int l, Rng& rng) {
  if (l < 1) throw InvalidArgument("draw_basis: feature count must be >= 1");
  const int d = kernel.dim();
  FourierBasis b;
  b.thetas.resize(l, d);
  b.taus.resize(l);
  b.amplitude = std::sqrt(kernel.signal_variance);
  for (int i = 0; i < l; ++i) {
    double scale = 1.0;
    switch (kernel.family) {
      case KernelFamily::squared_exponential: break;
      case KernelFamily::matern52:
        // Multivariate Student-t with 5 degrees of freedom.
        scale = std::sqrt(5.0 / chi_squared(rng, 5));
        break;
      default: throw UnsupportedKernel("no spectral sampler for this kernel family");
    }
    for (int j = 0; j < d; ++j) b.thetas(i, j) = scale * standard_normal(rng) / kernel.lengthscales[j];
    b.taus[i] = 2.0 * std::numbers::pi * uniform01(rng);
  }
  return b;
}

inline FourierBasis draw_basis(const FittedGP& gp, int l, Rng& rng) {
  return draw_basis(gp.kernel(), l, rng);
}

namespace detail {
inline std::uint64_t& eval_term_counter() {
  thread_local std::uint64_t count = 0;
  return count;
}
}  // namespace detail

/// Number of feature and kernel terms evaluated by samples on this thread.
inline std::uint64_t sample_terms_evaluated() { return detail::eval_term_counter(); }
inline void reset_sample_term_counter() { detail::eval_term_counter() = 0; }

/// One posterior function draw
///   h(x) = m + sum_i w_i phi_i(x) + sum_j v_j k(x, x_j),
/// reported through the output map F (identity for f-space samples).
///
/// Holds copies of the training inputs and kernel, so it outlives the GP.
class PosteriorSample {
 public:
  PosteriorSample(FourierBasis basis, Eigen::VectorXd w, Eigen::VectorXd v, Eigen::MatrixXd X,
                  KernelConfig kernel, double prior_mean, TransformSpec map)
      : basis_(std::move(basis)), w_(std::move(w)), v_(std::move(v)), X_(std::move(X)),
        kernel_(std::move(kernel)), prior_mean_(prior_mean), map_(map) {}

  const FourierBasis& basis() const { return basis_; }
  const Eigen::VectorXd& w() const { return w_; }
  const Eigen::VectorXd& v() const { return v_; }
  const Eigen::MatrixXd& training_inputs() const { return X_; }
  const KernelConfig& kernel() const { return kernel_; }
  double prior_mean() const { return prior_mean_; }
  const TransformSpec& map() const { return map_; }
  OutputSpace space() const { return map_.kind == TransformKind::identity ? OutputSpace::f : OutputSpace::h; }
  int dim() const { return basis_.dim(); }

  /// Latent value h(x).
  double latent(const Eigen::VectorXd& x) const {
    check(x);
    detail::eval_term_counter() += static_cast<std::uint64_t>(basis_.size() + X_.rows());
    double s = prior_mean_ + w_.dot(basis_.features(x));
    for (Eigen::Index j = 0; j < X_.rows(); ++j) s += v_[j] * kernel_(x, X_.row(j));
    return s;
  }

  double latent_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    check(x);
    detail::eval_term_counter() += static_cast<std::uint64_t>(basis_.size() + X_.rows());
    const Eigen::ArrayXd arg = (basis_.thetas * x + basis_.taus).array();
    const double c = basis_.feature_scale();
    double s = prior_mean_ + c * (w_.array() * arg.cos()).sum();
    grad = -c * basis_.thetas.transpose() * (w_.array() * arg.sin()).matrix();
    for (Eigen::Index j = 0; j < X_.rows(); ++j) {
      s += v_[j] * kernel_.accumulate_gradient(x, X_.row(j), v_[j], grad);
    }
    return s;
  }

  /// Sample value in objective units.
  double operator()(const Eigen::VectorXd& x) const { return map_.from_h(latent(x)); }

  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    const double h = latent_and_gradient(x, grad);
    grad *= map_.from_h_derivative(h);
    return map_.from_h(h);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g;
    value_and_gradient(x, g);
    return g;
  }

  /// Values at every row of P, in objective units.
  Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& P) const {
    if (P.cols() != dim()) throw DimensionMismatch("evaluate_batch: wrong point dimension");
    detail::eval_term_counter() += static_cast<std::uint64_t>(P.rows()) *
                                   static_cast<std::uint64_t>(basis_.size() + X_.rows());
    Eigen::VectorXd h = basis_.feature_matrix(P) * w_;
    h.array() += prior_mean_;
    if (X_.rows() > 0) h += kernel_.cross(P, X_) * v_;
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = map_.from_h(h[i]);
    return h;
  }

 private:
  void check(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
      throw DimensionMismatch("sample has dimension " + std::to_string(dim()) + ", point has " +
                              std::to_string(x.size()));
    }
  }

  FourierBasis basis_;
  Eigen::VectorXd w_;
  Eigen::VectorXd v_;
  Eigen::MatrixXd X_;
  KernelConfig kernel_;
  double prior_mean_ = 0.0;
  TransformSpec map_;
};

/// Builds the sample with prior weights `w`; v = (K + noise I)^{-1} (y - m - Phi w).
inline PosteriorSample make_sample(const FittedGP& gp, FourierBasis basis, Eigen::VectorXd w,
                                   const TransformSpec& map = TransformSpec::identity()) {
  if (basis.dim() != gp.dim()) throw DimensionMismatch("basis and GP dimensions differ");
  if (w.size() != basis.size()) throw DimensionMismatch("weight count differs from feature count");
  Eigen::VectorXd v(gp.size());
  if (gp.size() > 0) {
    const Eigen::VectorXd prior_at_data = basis.feature_matrix(gp.dataset().X) * w;
    v = gp.solve((gp.dataset().y.array() - gp.prior_mean()).matrix() - prior_at_data);
  }
  return PosteriorSample(std::move(basis), std::move(w), std::move(v), gp.dataset().X, gp.kernel(),
                         gp.prior_mean(), map);
}

inline PosteriorSample draw_sample(const FittedGP& gp, FourierBasis basis, Rng& rng,
                                   const TransformSpec& map = TransformSpec::identity()) {
  Eigen::VectorXd w(basis.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = standard_normal(rng);
  return make_sample(gp, std::move(basis), std::move(w), map);
}

/// Sample with a freshly drawn basis of `l` features.
inline PosteriorSample draw_sample(const FittedGP& gp, int l, Rng& rng,
                                   const TransformSpec& map = TransformSpec::identity()) {
  return draw_sample(gp, draw_basis(gp, l, rng), rng, map);
}

/// Located extrema of one sample plus its bound weight.
struct SampleSummary {
  double g_max = 0.0;
  double g_min = 0.0;
  Eigen::VectorXd x_max;
  Eigen::VectorXd x_min;
  double weight = 0.0;  // normalized over the batch
  double log_weight = -std::numeric_limits<double>::infinity();  // unnormalized log density
  int nonconverged_starts = 0;
};

struct ExtremaOptions {
  int n_starts = 0;               // quasi-random starts; 0 means 10 * d
  bool include_training = true;   // training inputs as extra starts
  int refine = 0;                 // descend only from the best `refine` starts; 0 = all
  LocalSearchOptions search;
};

namespace detail {

/// Best local optimum of sign * g over the starts.
inline void extremum(const PosteriorSample& s, const Eigen::MatrixXd& starts, double sign,
                     int refine, const LocalSearchOptions& search, double& best_value,
                     Eigen::VectorXd& best_x, int& nonconverged) {
  const Eigen::Index n = starts.rows();
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = sign * s(starts.row(i).transpose());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return vals[static_cast<std::size_t>(a)] > vals[static_cast<std::size_t>(b)];
  });
  const Eigen::Index k = refine > 0 ? std::min<Eigen::Index>(refine, n) : n;

  best_value = -std::numeric_limits<double>::infinity();
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double v = s.value_and_gradient(x, g);
    g *= sign;
    return sign * v;
  };
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = order[static_cast<std::size_t>(r)];
    const Eigen::VectorXd x0 = starts.row(i).transpose();
    if (r >= k) {
      if (vals[static_cast<std::size_t>(i)] > best_value) {
        best_value = vals[static_cast<std::size_t>(i)];
        best_x = x0;
      }
      continue;
    }
    const LocalSearchResult res = projected_ascent(objective, x0, search);
    if (!res.converged) ++nonconverged;
    if (res.value > best_value) {
      best_value = res.value;
      best_x = res.x;
    }
  }
  // Report the value exactly as the sample evaluates at the returned point.
  best_value = s(best_x);
}

}  // namespace detail

/// Starting points used by locate_extrema.
inline Eigen::MatrixXd extrema_starts(const PosteriorSample& s, const ExtremaOptions& opts = {}) {
  const int d = s.dim();
  const int n_q = opts.n_starts > 0 ? opts.n_starts : 10 * d;
  const Eigen::MatrixXd q = halton_points(n_q, d);
  if (!opts.include_training || s.training_inputs().rows() == 0) return q;
  Eigen::MatrixXd all(q.rows() + s.training_inputs().rows(), d);
  all << q, s.training_inputs();
  return all;
}

/// Global max and min of a sample on [0,1]^d by multi-start projected gradient search.
inline SampleSummary locate_extrema(const PosteriorSample& s, const ExtremaOptions& opts = {}) {
  const Eigen::MatrixXd starts = extrema_starts(s, opts);
  SampleSummary out;
  double vmax = 0.0, vmin = 0.0;
  detail::extremum(s, starts, 1.0, opts.refine, opts.search, vmax, out.x_max, out.nonconverged_starts);
  detail::extremum(s, starts, -1.0, opts.refine, opts.search, vmin, out.x_min, out.nonconverged_starts);
  out.g_max = vmax;
  out.g_min = vmin;
  if (out.g_min > out.g_max) {
    // Only possible for a numerically constant sample.
    out.g_min = out.g_max;
    out.x_min = out.x_max;
  }
  return out;
}

/// M samples with their extrema; each sample gets its own basis unless `shared_basis`.
struct SampleBatch {
  std::vector<PosteriorSample> samples;
  std::vector<SampleSummary> summaries;
};

struct SamplingOptions {
  int features = kDefaultFeatures;
  bool shared_basis = false;
  ExtremaOptions extrema;
};

inline SampleBatch draw_summarized(const FittedGP& gp, int M, Rng& rng,
                                   const TransformSpec& map = TransformSpec::identity(),
                                   const SamplingOptions& opts = {}) {
  if (M < 0) throw InvalidArgument("sample count must be nonnegative");
  SampleBatch batch;
  batch.samples.reserve(static_cast<std::size_t>(M));
  batch.summaries.reserve(static_cast<std::size_t>(M));
  FourierBasis shared;
  if (opts.shared_basis) shared = draw_basis(gp, opts.features, rng);
  for (int m = 0; m < M; ++m) {
    if (opts.shared_basis) {
      batch.samples.push_back(draw_sample(gp, shared, rng, map));
    } else {
      batch.samples.push_back(draw_sample(gp, opts.features, rng, map));
    }
    batch.summaries.push_back(locate_extrema(batch.samples.back(), opts.extrema));
  }
  return batch;
}

}  // namespace bgp
