#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "bounds.hpp"
#include "errors.hpp"
#include "gp.hpp"
#include "rff.hpp"
#include "srgp.hpp"
#include "stats.hpp"
#include "transform.hpp"

namespace bgp {

/// Predictive model used by the acquisitions: a GP on f, or a GP on the
/// square-root latent h with first-order moments mapped back to f.
class Surrogate {
 public:
  explicit Surrogate(FittedGP gp) : gp_(std::move(gp)) {}
  Surrogate(FittedGP gp_h, const TransformSpec& spec) : gp_(std::move(gp_h)), spec_(spec) {
    if (spec.kind == TransformKind::identity) {
      spec_.reset();
    } else if (spec.kind != TransformKind::square_root) {
      throw InvalidArgument("surrogate supports only the square-root transform");
    }
  }

  const FittedGP& latent() const { return gp_; }
  bool transformed() const { return spec_.has_value(); }
  TransformSpec output_map() const { return spec_ ? *spec_ : TransformSpec::identity(); }
  int dim() const { return gp_.dim(); }

  Prediction predict(const Eigen::VectorXd& x) const {
    return spec_ ? srgp_posterior(gp_, *spec_, x) : gp_.posterior(x);
  }

  /// f-space variance at x_query after observing x_pending.
  double extended_variance(const Eigen::VectorXd& x_pending, const Eigen::VectorXd& x_query) const {
    const double v = gp_.extended_variance(x_pending, x_query);
    if (!spec_) return v;
    const double mu = gp_.posterior(x_query).mean;
    return mu * v * mu;
  }

  double mean(const Eigen::VectorXd& x) const { return predict(x).mean; }

 private:
  FittedGP gp_;
  std::optional<TransformSpec> spec_;
};

/// Everything an acquisition may need at one BO iteration. Values are in the
/// standardized output space of the surrogate's data.
struct AcquisitionContext {
  Surrogate surrogate;
  std::vector<PosteriorSample> samples;
  std::vector<SampleSummary> summaries;
  std::optional<ApproxBounds> bounds;
  int iteration = 1;
  double best_y = 0.0;
};

enum class BesForm {
  /// w_m * N(g+ | mu, var) * 0.5 * log(var / var_x): Gaussian information gain
  /// at x+_m, weighted by the density of g+_m without the new observation.
  information_gain,
  /// w_m * N(g+ | mu, var_x) * log(N(g+ | mu, var_x) / N(g+ | mu, var)) with the
  /// new observation's mean shift dropped. Can be negative.
  plug_in,
};

inline std::string_view to_string(BesForm f) {
  return f == BesForm::information_gain ? "information-gain" : "plug-in";
}

struct BesOptions {
  BesForm form = BesForm::information_gain;
  /// plug-in only: average over this many stratified draws of y_x instead of
  /// dropping the mean shift. 0 disables.
  int mc_samples = 0;
  bool uniform_weights = false;
  double variance_floor = 1e-12;
};

/// Precomputes the per-sample quantities of the entropy-search acquisition so
/// that each evaluation costs O(N^2 + M N).
class BesEvaluator {
 public:
  BesEvaluator(const AcquisitionContext& ctx, const BesOptions& opts = {})
      : gp_(&ctx.surrogate.latent()), map_(ctx.surrogate.output_map()), opts_(opts) {
    const std::size_t M = ctx.summaries.size();
    if (M == 0) throw NoAdmissibleSample("acquisition context holds no samples");
    if (opts_.mc_samples > 0) {
      for (int k = 0; k < opts_.mc_samples; ++k) {
        quantiles_.push_back(std_normal_quantile((k + 0.5) / opts_.mc_samples));
      }
    }
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const auto& s = ctx.summaries[m];
      const double w = opts_.uniform_weights ? 1.0 / static_cast<double>(M) : s.weight;
      if (w < 0.0) throw InvalidArgument("negative sample weight");
      total += w;
      if (w <= 0.0) continue;
      Term t;
      t.x = s.x_max;
      t.g = s.g_max;
      t.log_coef = std::log(w) - std::log(static_cast<double>(M));
      const Prediction lat = gp_->posterior(t.x);
      t.mu_h = lat.mean;
      t.var_h = lat.variance;
      t.whitened = gp_->whiten(gp_->cross_covariance(t.x));
      t.scale = map_.kind == TransformKind::square_root ? lat.mean * lat.mean : 1.0;
      t.mu = map_.kind == TransformKind::square_root ? map_.ceiling() - 0.5 * lat.mean * lat.mean : lat.mean;
      t.var = t.scale * t.var_h;
      t.active = t.var > opts_.variance_floor;
      if (t.active) {
        t.log_density = normal_logpdf(t.g, t.mu, t.var);
        if (opts_.form == BesForm::information_gain) t.log_coef += t.log_density;
      }
      terms_.push_back(std::move(t));
    }
    if (!(total > 0.0)) throw NoAdmissibleSample("every sample has zero weight");
    log_scale_ = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) {
      if (t.active) log_scale_ = std::max(log_scale_, t.log_coef);
    }
    if (!std::isfinite(log_scale_) || opts_.form == BesForm::plug_in) log_scale_ = 0.0;
  }

  /// Acquisition value.
  double operator()(const Eigen::VectorXd& x) const { return std::exp(log_scale_) * scaled(x); }

  /// Value divided by a positive per-context constant; same argmax, no underflow.
  double scaled(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for_each_term(x, [&](double v) { total += v; });
    return total;
  }

  /// Per-sample contributions (zero-weight samples omitted), unscaled.
  std::vector<double> terms(const Eigen::VectorXd& x) const {
    std::vector<double> out;
    for_each_term(x, [&](double v) { out.push_back(std::exp(log_scale_) * v); });
    return out;
  }

  int active_terms() const {
    return static_cast<int>(std::count_if(terms_.begin(), terms_.end(), [](const Term& t) { return t.active; }));
  }

 private:
  struct Term {
    Eigen::VectorXd x;
    double g = 0.0;
    double log_coef = 0.0;
    double mu_h = 0.0, var_h = 0.0;
    double mu = 0.0, var = 0.0, scale = 1.0;
    double log_density = 0.0;
    Eigen::VectorXd whitened;
    bool active = false;
  };

  template <class Sink>
  void for_each_term(const Eigen::VectorXd& x, Sink&& sink) const {
    const Eigen::VectorXd vx = gp_->whiten(gp_->cross_covariance(x));
    const double kxx = gp_->kernel()(x, x);
    const double var_x = std::max(kxx - vx.squaredNorm(), 0.0);
    const bool informative = var_x >= kPendingVarianceTolerance;
    const double schur = var_x + gp_->effective_noise();
    for (const auto& t : terms_) {
      if (!t.active || !informative) {
        sink(0.0);
        continue;
      }
      const double cov = gp_->kernel()(x, t.x) - vx.dot(t.whitened);
      const double var_hx = std::clamp(t.var_h - cov * cov / schur, 0.0, t.var_h);
      const double var_fx = std::max(t.scale * var_hx, opts_.variance_floor);
      if (opts_.form == BesForm::information_gain) {
        const double gain = 0.5 * (std::log(t.var) - std::log(var_fx));
        sink(std::exp(t.log_coef - log_scale_) * std::max(gain, 0.0));
        continue;
      }
      if (quantiles_.empty()) {
        const double ld = normal_logpdf(t.g, t.mu, var_fx);
        sink(std::exp(t.log_coef) * std::exp(ld) * (ld - t.log_density));
        continue;
      }
      // Mean shift of the latent at x+ given y_x = mu(x) + sqrt(schur) z.
      const double shift = cov / std::sqrt(schur);
      double acc = 0.0;
      for (double z : quantiles_) {
        const double mu_hx = t.mu_h + shift * z;
        double mu_fx = mu_hx, v = var_hx;
        if (map_.kind == TransformKind::square_root) {
          mu_fx = map_.ceiling() - 0.5 * mu_hx * mu_hx;
          v = mu_hx * mu_hx * var_hx;
        }
        v = std::max(v, opts_.variance_floor);
        const double ld = normal_logpdf(t.g, mu_fx, v);
        acc += std::exp(ld) * (ld - t.log_density);
      }
      sink(std::exp(t.log_coef) * acc / static_cast<double>(quantiles_.size()));
    }
  }

  const FittedGP* gp_;
  TransformSpec map_;
  BesOptions opts_;
  std::vector<Term> terms_;
  std::vector<double> quantiles_;
  double log_scale_ = 0.0;
};

inline double bes_acquisition(const Eigen::VectorXd& x, const AcquisitionContext& ctx, const BesOptions& opts = {}) {
  return BesEvaluator(ctx, opts)(x);
}

/// Entropy search with every sample weighted 1/M.
inline double bes_no_weighting(const Eigen::VectorXd& x, const AcquisitionContext& ctx, BesOptions opts = {}) {
  opts.uniform_weights = true;
  return BesEvaluator(ctx, opts)(x);
}

inline constexpr double kDefaultEiXi = 0.01;

/// Closed-form expected improvement over best_y with exploration margin xi.
inline double expected_improvement(double mu, double sigma, double best_y, double xi = kDefaultEiXi) {
  if (!(sigma > 0.0)) return std::max(mu - best_y, 0.0);
  const double imp = mu - best_y - xi;
  const double z = imp / sigma;
  return imp * std_normal_cdf(z) + sigma * std_normal_pdf(z);
}

inline double ei_acquisition(const Eigen::VectorXd& x, const Surrogate& s, double best_y, double xi = kDefaultEiXi) {
  const Prediction p = s.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_y, xi);
}

inline double ei_acquisition(const Eigen::VectorXd& x, const FittedGP& gp, double best_y, double xi = kDefaultEiXi) {
  const Prediction p = gp.posterior(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_y, xi);
}

/// beta_t = 2 log(d t^2 pi^2 / (6 delta)).
inline double ucb_beta(int d, int t, double delta = 0.1) {
  const double tt = std::max(t, 1);
  return 2.0 * std::log(d * tt * tt * std::numbers::pi * std::numbers::pi / (6.0 * delta));
}

inline double ucb_acquisition(const Eigen::VectorXd& x, const Surrogate& s, double beta) {
  const Prediction p = s.predict(x);
  return p.mean + std::sqrt(beta) * std::sqrt(p.variance);
}

inline double ucb_acquisition(const Eigen::VectorXd& x, const FittedGP& gp, double beta) {
  const Prediction p = gp.posterior(x);
  return p.mean + std::sqrt(beta) * std::sqrt(p.variance);
}

inline Eigen::VectorXd thompson_select(const PosteriorSample& sample, const ExtremaOptions& opts = {}) {
  return locate_extrema(sample, opts).x_max;
}

}  // namespace bgp
