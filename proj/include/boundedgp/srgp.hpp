#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <optional>
#include <vector>

#include "bounds.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "gp.hpp"
#include "rff.hpp"
#include "transform.hpp"

namespace bgp {

struct LatentData {
  Dataset data;          // same inputs, latent outputs (not standardized)
  int clamp_events = 0;  // observations clipped to keep the transform finite
};

/// Maps observed outputs into the latent space of `spec`.
inline LatentData to_h_space(const Dataset& ds, const TransformSpec& spec) {
  spec.validate();
  LatentData out;
  out.data = ds;
  out.data.y_mean = 0.0;
  out.data.y_std = 1.0;
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    bool clamped = false;
    out.data.y[i] = spec.to_h(ds.y[i], &clamped);
    if (clamped) ++out.clamp_events;
  }
  return out;
}

inline double from_h(const TransformSpec& spec, double h) { return spec.from_h(h); }

/// Square-root transform for the upper bound of `b`.
inline TransformSpec sqrt_transform(const ApproxBounds& b) {
  if (!b.f_plus) throw InvalidArgument("square-root transform requires f_plus");
  return TransformSpec::square_root(*b.f_plus, b.eta_plus_sq);
}

/// Fits the latent GP on transformed data with prior mean equal to the mean latent value.
inline FittedGP fit_latent_gp(const Dataset& ds, const TransformSpec& spec, const KernelConfig& kernel,
                              FitOptions fit = {}, int* clamp_events = nullptr) {
  LatentData h = to_h_space(ds, spec);
  if (clamp_events) *clamp_events = h.clamp_events;
  fit.prior_mean = h.data.y.size() > 0 ? h.data.y.mean() : 0.0;
  fit.space = OutputSpace::h;
  return fit_gp(h.data, kernel, fit);
}

/// First-order predictive moments of f = c - h^2 / 2 around the latent mean:
///   mean = c - mu_h^2 / 2,  variance = mu_h * var_h * mu_h.
inline Prediction srgp_posterior(const FittedGP& gp_h, const TransformSpec& spec, const Eigen::VectorXd& x) {
  if (spec.kind != TransformKind::square_root) throw InvalidArgument("srgp_posterior needs a square-root transform");
  const Prediction p = gp_h.posterior(x);
  return {spec.ceiling() - 0.5 * p.mean * p.mean, p.mean * p.variance * p.mean};
}

struct Algorithm1Options {
  KernelConfig kernel;  // empty lengthscales means isotropic 0.2 for the data dimension
  FitOptions fit{true, 0, 8, 200, 0.0, OutputSpace::h};
  SamplingOptions sampling;
};

struct Algorithm1Result {
  std::optional<FittedGP> gp_h;
  TransformSpec spec;
  std::vector<PosteriorSample> samples;
  std::vector<SampleSummary> summaries;
  Eigen::VectorXd weights;
  int admissible = 0;
  int accepted = 0;
  int clamp_events = 0;

  /// Weighted aggregate of the mapped samples at x.
  double aggregate(const Eigen::VectorXd& x) const { return weighted_aggregate(samples, weights, x); }
};

inline KernelConfig default_kernel(int d) { return KernelConfig::isotropic(d, 0.2); }

/// SRGP weighting: fit the square-root GP, draw M mapped samples, locate their
/// extrema and weight them against every present bound.
inline Algorithm1Result run_algorithm1(const Dataset& ds, const ApproxBounds& bounds, int M, Rng& rng,
                                       Algorithm1Options opts = {}) {
  bounds.validate();
  if (M < 1) throw InvalidArgument("run_algorithm1: M must be >= 1");
  if (opts.kernel.lengthscales.size() == 0) opts.kernel = default_kernel(ds.dim());
  Algorithm1Result r;
  r.spec = sqrt_transform(bounds);
  r.gp_h.emplace(fit_latent_gp(ds, r.spec, opts.kernel, opts.fit, &r.clamp_events));
  SampleBatch batch = draw_summarized(*r.gp_h, M, rng, r.spec, opts.sampling);
  r.samples = std::move(batch.samples);
  r.summaries = std::move(batch.summaries);
  r.admissible = assign_weights(bounds, r.summaries);
  r.accepted = count_accepted(bounds, r.summaries);
  r.weights = weights_of(r.summaries);
  if (r.admissible == 0) throw NoAdmissibleSample("run_algorithm1: every sample has zero weight");
  return r;
}

}  // namespace bgp
