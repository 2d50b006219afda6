#include <gtest/gtest.h>

#include <boundedgp/srgp.hpp>
#include <cmath>
#include <vector>

namespace {

using namespace bgp;

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) X(i++, 0) = x;
  return X;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::VectorXd point(double x) { return Eigen::VectorXd::Constant(1, x); }

TEST(SrgpTransform, ApexMapsToZero) {
  const TransformSpec s = TransformSpec::square_root(1.0, 0.04);
  EXPECT_DOUBLE_EQ(s.ceiling(), 1.4);
  bool clamped = true;
  EXPECT_EQ(s.to_h(1.4, &clamped), 0.0);
  EXPECT_FALSE(clamped);
  EXPECT_DOUBLE_EQ(s.from_h(0.0), 1.4);
}

TEST(SrgpTransform, SquareRootOfTwiceTheGap) {
  const TransformSpec s = TransformSpec::square_root(3.0, 0.0);
  EXPECT_DOUBLE_EQ(s.to_h(1.0), 2.0);
  EXPECT_DOUBLE_EQ(s.from_h(2.0), 1.0);
  EXPECT_DOUBLE_EQ(s.from_h(-2.0), 1.0);
}

TEST(SrgpTransform, SinusoidalMidpoint) {
  const TransformSpec s = TransformSpec::sinusoidal(3.0, -1.0);
  EXPECT_NEAR(s.to_h(1.0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.from_h(0.0), 1.0);
  EXPECT_NEAR(s.from_h(M_PI / 2.0), 3.0, 1e-15);
  EXPECT_NEAR(s.from_h(-M_PI / 2.0), -1.0, 1e-15);
}

TEST(SrgpTransform, SigmoidSaturates) {
  const TransformSpec s = TransformSpec::sigmoid(2.0, -1.0);
  EXPECT_NEAR(s.from_h(50.0), 2.0, 1e-12);
  EXPECT_NEAR(s.from_h(-50.0), -1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.from_h(0.0), 0.5);
}

TEST(SrgpTransform, RoundTrips) {
  const TransformSpec specs[] = {TransformSpec::square_root(1.0, 0.09), TransformSpec::sinusoidal(1.0, -2.0),
                                 TransformSpec::sigmoid(1.0, -2.0)};
  for (const auto& s : specs) {
    for (double y = -1.95; y < 0.99; y += 0.05) {
      bool clamped = true;
      const double h = s.to_h(y, &clamped);
      EXPECT_FALSE(clamped);
      EXPECT_NEAR(s.from_h(h), y, 1e-8) << to_string(s.kind) << " y=" << y;
    }
  }
}

TEST(SrgpTransform, DerivativeMatchesDifference) {
  const TransformSpec specs[] = {TransformSpec::square_root(1.0, 0.09), TransformSpec::sinusoidal(1.0, -2.0),
                                 TransformSpec::sigmoid(1.0, -2.0)};
  for (const auto& s : specs) {
    for (double h = -2.0; h <= 2.0; h += 0.25) {
      const double fd = (s.from_h(h + 1e-6) - s.from_h(h - 1e-6)) / 2e-6;
      EXPECT_NEAR(s.from_h_derivative(h), fd, 1e-7);
    }
  }
}

TEST(SrgpTransform, ValidationRejectsInvertedBounds) {
  EXPECT_THROW(TransformSpec::sinusoidal(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(TransformSpec::sigmoid(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(TransformSpec::square_root(1.0, -0.1), InvalidArgument);
}

TEST(SrgpTransform, ViolatingObservationsAreClampedAndCounted) {
  const TransformSpec s = TransformSpec::square_root(0.0, 0.0);
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.5, 0.9}), vec({-2.0, 0.5, 0.0}));
  const LatentData h = to_h_space(ds, s);
  EXPECT_EQ(h.clamp_events, 1);
  EXPECT_DOUBLE_EQ(h.data.y[0], 2.0);
  EXPECT_DOUBLE_EQ(h.data.y[1], std::sqrt(kTransformClamp));
  EXPECT_EQ(h.data.y[2], 0.0);
  EXPECT_EQ(h.data.y_mean, 0.0);
  EXPECT_EQ(h.data.y_std, 1.0);

  const TransformSpec sig = TransformSpec::sigmoid(1.0, 0.0);
  const LatentData hs = to_h_space(Dataset::unstandardized(column({0.2, 0.4}), vec({1.0, 0.5})), sig);
  EXPECT_EQ(hs.clamp_events, 1);
  EXPECT_TRUE(std::isfinite(hs.data.y[0]));
}

TEST(SrgpTransform, LatentGpUsesMeanOfLatentData) {
  const TransformSpec s = TransformSpec::square_root(1.0, 0.04);
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.4, 0.6, 0.9}), vec({0.68, 1.355, 1.275, 0.12}));
  FitOptions fit;
  fit.space = OutputSpace::h;
  const FittedGP gp = fit_latent_gp(ds, s, KernelConfig::isotropic(1, 0.25, 0.5, 1e-3), fit);
  double mean = 0.0;
  for (int i = 0; i < 4; ++i) mean += s.to_h(ds.y[i]);
  EXPECT_NEAR(gp.prior_mean(), mean / 4.0, 1e-14);
  EXPECT_EQ(gp.space(), OutputSpace::h);
}

TEST(SrgpTransform, PosteriorMomentsMatchDirectInverseOracle) {
  // Latent data h = (1.2, 0.3, 0.5, 1.6) under a ceiling of 1.4.
  const TransformSpec s = TransformSpec::square_root(1.0, 0.04);
  const Eigen::VectorXd h = vec({1.2, 0.3, 0.5, 1.6});
  const FittedGP gp(Dataset::unstandardized(column({0.1, 0.4, 0.6, 0.9}), h),
                    KernelConfig::isotropic(1, 0.25, 0.5, 1e-3), h.mean(), OutputSpace::h);
  const double qs[] = {0.25, 0.5, 0.75};
  const double mu[] = {1.1331817539735651, 1.3630847713135785, 0.7716857094687063};
  const double var[] = {0.008111080813633332, 0.00023246836661156638, 0.019100297909743106};
  for (int i = 0; i < 3; ++i) {
    const Prediction p = srgp_posterior(gp, s, point(qs[i]));
    EXPECT_NEAR(p.mean, mu[i], 1e-9);
    EXPECT_NEAR(p.variance, var[i], 1e-9);
  }
}

TEST(SrgpTransform, VarianceScalesWithLatentMeanSquared) {
  // A prior-only latent GP with mean 2 and variance 0.25 gives 4 * 0.25 = 1.
  const FittedGP gp = prior_gp(1, KernelConfig::isotropic(1, 0.3, 0.25), 2.0, OutputSpace::h);
  const TransformSpec s = TransformSpec::square_root(0.0, 0.0);
  const Prediction p = srgp_posterior(gp, s, point(0.5));
  EXPECT_DOUBLE_EQ(p.variance, 1.0);
  EXPECT_DOUBLE_EQ(p.mean, -2.0);
  EXPECT_THROW(srgp_posterior(gp, TransformSpec::sigmoid(1.0, 0.0), point(0.5)), InvalidArgument);
}

TEST(SrgpTransform, MomentsAgreeWithMonteCarloUpToCurvatureBias) {
  Rng rng(11);
  const TransformSpec s = TransformSpec::square_root(0.5, 0.09);
  Eigen::MatrixXd X(6, 1);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = (i + 0.5) / 6.0;
    y[i] = 0.3 * std::sin(6.0 * X(i, 0)) - 0.5;
  }
  FitOptions fit;
  fit.space = OutputSpace::h;
  const FittedGP gp = fit_latent_gp(Dataset::unstandardized(X, y), s, KernelConfig::isotropic(1, 0.2, 0.4, 1e-4), fit);
  for (int q = 0; q < 50; ++q) {
    const Eigen::VectorXd x = point((q + 0.5) / 50.0);
    const Prediction ph = gp.posterior(x);
    const Prediction pf = srgp_posterior(gp, s, x);
    const int n = 5000;
    double sum = 0.0, sum2 = 0.0;
    for (int m = 0; m < n; ++m) {
      const double f = s.from_h(ph.mean + std::sqrt(ph.variance) * standard_normal(rng));
      sum += f;
      sum2 += f * f;
    }
    const double mc_mean = sum / n;
    const double mc_var = sum2 / n - mc_mean * mc_mean;
    const double se = std::sqrt(mc_var / n);
    EXPECT_NEAR(pf.mean, mc_mean, std::max(0.05, 3.0 * se) + 0.5 * ph.variance) << "x=" << x[0];
  }
}

TEST(SrgpTransform, MappedSamplesStayBelowCeiling) {
  Rng rng(12);
  const TransformSpec s = TransformSpec::square_root(1.0, 0.01);
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.35, 0.6, 0.85}), vec({0.2, 0.9, -0.4, 0.5}));
  FitOptions fit;
  fit.space = OutputSpace::h;
  const FittedGP gp = fit_latent_gp(ds, s, KernelConfig::isotropic(1, 0.2, 1.0, 1e-4), fit);
  for (int m = 0; m < 5; ++m) {
    const PosteriorSample g = draw_sample(gp, 200, rng, s);
    for (int i = 0; i < 2000; ++i) EXPECT_LE(g(point(i / 1999.0)), s.ceiling());
  }
}

TEST(SrgpTransform, BoundedMapsKeepSamplesInsideBothBounds) {
  Rng rng(13);
  const Dataset ds = Dataset::unstandardized(column({0.2, 0.5, 0.8}), vec({0.3, -0.6, 0.9}));
  const TransformSpec specs[] = {TransformSpec::sinusoidal(1.0, -1.0), TransformSpec::sigmoid(1.0, -1.0)};
  for (const auto& s : specs) {
    const FittedGP gp(to_h_space(ds, s).data, KernelConfig::isotropic(1, 0.2, 4.0, 1e-4), 0.0, OutputSpace::h);
    for (int m = 0; m < 5; ++m) {
      const PosteriorSample g = draw_sample(gp, 200, rng, s);
      for (int i = 0; i < 1000; ++i) {
        const double v = g(point(i / 999.0));
        EXPECT_LE(v, 1.0);
        EXPECT_GE(v, -1.0);
      }
    }
  }
}

TEST(SrgpTransform, AlgorithmWithSingleSampleAggregatesToThatSample) {
  Rng rng(14);
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.5, 0.9}), vec({0.2, 0.8, -0.3}));
  Algorithm1Options opts;
  opts.fit.optimize_hypers = false;
  const Algorithm1Result r = run_algorithm1(ds, ApproxBounds::upper(1.0, 0.5), 1, rng, opts);
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.admissible, 1);
  EXPECT_DOUBLE_EQ(r.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(r.aggregate(point(0.3)), r.samples[0](point(0.3)));
}

TEST(SrgpTransform, AlgorithmWithImpossibleBoundsThrows) {
  Rng rng(15);
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.5, 0.9}), vec({0.2, 0.8, -0.3}));
  Algorithm1Options opts;
  opts.fit.optimize_hypers = false;
  EXPECT_THROW(run_algorithm1(ds, ApproxBounds::both(1.0, 1e-4, 0.9, 1e-4), 8, rng, opts), NoAdmissibleSample);
  EXPECT_THROW(run_algorithm1(ds, ApproxBounds::upper(1.0, 0.5), 0, rng, opts), InvalidArgument);
}

TEST(SrgpTransform, AlgorithmIsDeterministicGivenSeed) {
  const Dataset ds = Dataset::unstandardized(column({0.1, 0.5, 0.9}), vec({0.2, 0.8, -0.3}));
  Algorithm1Options opts;
  opts.fit.optimize_hypers = false;
  Rng a(16), b(16);
  const Algorithm1Result ra = run_algorithm1(ds, ApproxBounds::upper(1.0, 0.5), 16, a, opts);
  const Algorithm1Result rb = run_algorithm1(ds, ApproxBounds::upper(1.0, 0.5), 16, b, opts);
  EXPECT_EQ(ra.weights, rb.weights);
  EXPECT_EQ(ra.aggregate(point(0.7)), rb.aggregate(point(0.7)));
  EXPECT_NEAR(ra.weights.sum(), 1.0, 1e-12);
}

}  // namespace
