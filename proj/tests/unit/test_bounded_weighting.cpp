#include <gtest/gtest.h>

#include <algorithm>
#include <boundedgp/bounds.hpp>
#include <boundedgp/rff.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace {

using namespace bgp;

SampleSummary summary(double g_max, double g_min) {
  SampleSummary s;
  s.g_max = g_max;
  s.g_min = g_min;
  s.x_max = Eigen::VectorXd::Zero(1);
  s.x_min = Eigen::VectorXd::Zero(1);
  return s;
}

// g(x) = offset + slope * cos(x), built from a one-feature basis with no data.
PosteriorSample cosine_sample(double offset, double slope) {
  FourierBasis b;
  b.thetas = Eigen::MatrixXd::Ones(1, 1);
  b.taus = Eigen::VectorXd::Zero(1);
  b.amplitude = 1.0;
  Eigen::VectorXd w(1);
  w[0] = slope / std::sqrt(2.0);
  return PosteriorSample(b, w, Eigen::VectorXd(0), Eigen::MatrixXd(0, 1), KernelConfig::isotropic(1, 1.0), offset,
                         TransformSpec::identity());
}

TEST(BoundedWeighting, BivariatePeakDensity) {
  const ApproxBounds b = ApproxBounds::both(1.0, 1.0, -1.0, 1.0);
  EXPECT_NEAR(weight(b, summary(1.0, -1.0)), 1.0 / (2.0 * std::numbers::pi), 1e-15);
}

TEST(BoundedWeighting, UpperOnlyOneSigmaDensity) {
  const double eta = 0.3;
  const ApproxBounds b = ApproxBounds::upper(2.0, eta * eta);
  const double expected = std::exp(-0.5) / (eta * std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(weight(b, summary(2.0 + eta, -50.0)), expected, 1e-14);
}

TEST(BoundedWeighting, DensityProductOracle) {
  struct Case {
    double g_max, g_min, f_plus, eta_plus_sq, f_minus, eta_minus_sq, expected;
  };
  const Case cases[] = {{0.3, -1.1, 0.5, 0.02, -2.0, 1.0, 0.27613495546501415},
                        {1.7, -0.4, 1.0, 0.1, -1.0, 0.5, 0.0428516585116076},
                        {-0.2, -3.0, 0.0, 2.0, -2.5, 4.0, 0.05399586349754443}};
  for (const auto& c : cases) {
    const ApproxBounds b = ApproxBounds::both(c.f_plus, c.eta_plus_sq, c.f_minus, c.eta_minus_sq);
    EXPECT_NEAR(weight(b, summary(c.g_max, c.g_min)), c.expected, 1e-14);
  }
}

TEST(BoundedWeighting, BoundsValidation) {
  EXPECT_THROW(ApproxBounds::both(0.0, 1.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(ApproxBounds::upper(0.0, 0.0), InvalidArgument);
  ApproxBounds none;
  none.f_plus.reset();
  EXPECT_THROW(none.validate(), InvalidArgument);
}

TEST(BoundedWeighting, TwoSigmaBandIsClosed) {
  const ApproxBounds b = ApproxBounds::upper(0.5, 0.25);  // eta = 0.5
  EXPECT_TRUE(accept(b, summary(1.5, 0.0)));
  EXPECT_TRUE(accept(b, summary(-0.5, -1.0)));
  EXPECT_FALSE(accept(b, summary(0.5 + 2.01 * 0.5, 0.0)));
  const ApproxBounds both = ApproxBounds::both(0.5, 0.25, -1.0, 0.04);
  EXPECT_FALSE(accept(both, summary(0.5, -1.0 - 2.01 * 0.2)));
  EXPECT_TRUE(accept(both, summary(0.5, -1.0 - 2.0 * 0.2)));
}

TEST(BoundedWeighting, AcceptCountMatchesReplayLoop) {
  Rng rng(1);
  const ApproxBounds b = ApproxBounds::both(1.0, 0.09, -1.0, 0.25);
  std::vector<SampleSummary> batch;
  for (int m = 0; m < 500; ++m) batch.push_back(summary(1.0 + 0.5 * standard_normal(rng), -1.0 + standard_normal(rng)));
  int replay = 0;
  for (const auto& s : batch) {
    if (std::abs(s.g_max - 1.0) <= 0.6 && std::abs(s.g_min + 1.0) <= 1.0) ++replay;
  }
  EXPECT_EQ(count_accepted(b, batch), replay);
  EXPECT_EQ(static_cast<int>(accepted_subset(b, batch).size()), replay);
}

TEST(BoundedWeighting, AcceptedSamplesCarryAtLeastTwoSigmaDensity) {
  Rng rng(2);
  const ApproxBounds b = ApproxBounds::both(0.4, 0.05, -2.0, 0.8);
  const double peak = weight(b, summary(0.4, -2.0));
  for (int m = 0; m < 2000; ++m) {
    const SampleSummary s = summary(0.4 + 0.4 * standard_normal(rng), -2.0 + 1.5 * standard_normal(rng));
    if (accept(b, s)) {
      EXPECT_GE(weight(b, s), std::exp(-2.0) * std::exp(-2.0) * peak * (1.0 - 1e-12));
    }
  }
}

TEST(BoundedWeighting, NormalizedWeightsSumToOne) {
  Rng rng(3);
  const ApproxBounds b = ApproxBounds::both(1.0, 0.02, -1.0, 1.0);
  std::vector<SampleSummary> batch;
  for (int m = 0; m < 200; ++m) batch.push_back(summary(1.0 + standard_normal(rng), -1.0 + standard_normal(rng)));
  EXPECT_GT(assign_weights(b, batch), 0);
  EXPECT_NEAR(weights_of(batch).sum(), 1.0, 1e-12);
  for (const auto& s : batch) EXPECT_GE(s.weight, 0.0);
}

TEST(BoundedWeighting, TightBandsDoNotUnderflow) {
  const ApproxBounds b = ApproxBounds::upper(0.0, 1e-8);
  std::vector<SampleSummary> batch{summary(0.003, 0.0), summary(0.004, 0.0), summary(0.0035, 0.0)};
  // Raw densities are exp(-450), exp(-800) and exp(-612): the middle one is below the floor.
  EXPECT_EQ(assign_weights(b, batch), 2);
  EXPECT_GT(batch[0].weight, 0.99);
  EXPECT_EQ(batch[1].weight, 0.0);
  EXPECT_GT(batch[2].weight, 0.0);
}

TEST(BoundedWeighting, ImpossibleBoundsGiveNoAdmissibleSample) {
  const ApproxBounds b = ApproxBounds::upper(100.0, 0.01);
  std::vector<SampleSummary> batch{summary(0.0, -1.0), summary(1.0, -1.0)};
  EXPECT_EQ(assign_weights(b, batch), 0);
  EXPECT_EQ(weights_of(batch).sum(), 0.0);
  const std::vector<PosteriorSample> samples{cosine_sample(0.0, 1.0), cosine_sample(1.0, 1.0)};
  EXPECT_THROW(weighted_aggregate(samples, weights_of(batch), Eigen::VectorXd::Zero(1)), NoAdmissibleSample);
}

TEST(BoundedWeighting, ShiftEquivariance) {
  Rng rng(4);
  const ApproxBounds b = ApproxBounds::both(0.7, 0.1, -1.3, 0.6);
  for (int t = 0; t < 50; ++t) {
    const double c = 10.0 * standard_normal(rng);
    const SampleSummary s = summary(0.7 + 0.3 * standard_normal(rng), -1.3 + standard_normal(rng));
    const ApproxBounds bs = ApproxBounds::both(0.7 + c, 0.1, -1.3 + c, 0.6);
    EXPECT_NEAR(weight(bs, summary(s.g_max + c, s.g_min + c)), weight(b, s), 1e-9 * weight(b, s) + 1e-300);
  }
}

TEST(BoundedWeighting, AggregateOfSingleSample) {
  const std::vector<PosteriorSample> samples{cosine_sample(0.3, 2.0)};
  Eigen::VectorXd w(1);
  w[0] = 0.37;
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.6);
  EXPECT_NEAR(weighted_aggregate(samples, w, x), samples[0](x), 1e-15);
}

TEST(BoundedWeighting, AggregateWithEqualWeightsIsMean) {
  const std::vector<PosteriorSample> samples{cosine_sample(0.0, 1.0), cosine_sample(1.0, -2.0),
                                             cosine_sample(-0.5, 0.5)};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.25);
  const double mean = (samples[0](x) + samples[1](x) + samples[2](x)) / 3.0;
  EXPECT_NEAR(weighted_aggregate(samples, Eigen::VectorXd::Constant(3, 0.2), x), mean, 1e-15);
}

TEST(BoundedWeighting, AggregateConvexCombination) {
  const std::vector<PosteriorSample> samples{cosine_sample(0.0, 1.0), cosine_sample(1.0, -2.0),
                                             cosine_sample(-0.5, 0.5)};
  Eigen::VectorXd w(3);
  w << 1.0, 2.0, 3.0;
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.8);
  const double expected = (1.0 * samples[0](x) + 2.0 * samples[1](x) + 3.0 * samples[2](x)) / 6.0;
  EXPECT_NEAR(weighted_aggregate(samples, w, x), expected, 1e-12);
  w[1] = -1.0;
  EXPECT_THROW(weighted_aggregate(samples, w, x), InvalidArgument);
}

TEST(BoundedWeighting, RankSelectOrdersByWeight) {
  std::vector<SampleSummary> s(3);
  s[0].weight = 0.1;
  s[1].weight = 0.9;
  s[2].weight = 0.5;
  EXPECT_EQ(rank_select(s, 2), (std::vector<int>{1, 2}));
}

TEST(BoundedWeighting, RankSelectTiesGoToLowerIndex) {
  std::vector<SampleSummary> s(4);
  for (auto& x : s) {
    x.weight = 0.25;
    x.log_weight = -1.0;
  }
  EXPECT_EQ(rank_select(s, 2), (std::vector<int>{0, 1}));
  EXPECT_THROW(rank_select(s, 5), InvalidArgument);
}

TEST(BoundedWeighting, RankSelectAgreesWithFullSort) {
  Rng rng(5);
  std::vector<SampleSummary> s(200);
  std::vector<std::pair<double, int>> oracle;
  for (int i = 0; i < 200; ++i) {
    s[static_cast<std::size_t>(i)].weight = std::floor(uniform01(rng) * 50.0) / 50.0;
    oracle.emplace_back(-s[static_cast<std::size_t>(i)].weight, i);
  }
  std::sort(oracle.begin(), oracle.end());
  const std::vector<int> got = rank_select(s, 100);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(got[static_cast<std::size_t>(i)], oracle[static_cast<std::size_t>(i)].second);
}

TEST(BoundedWeighting, LemmaReportOnIdenticalSets) {
  std::vector<SampleSummary> set{summary(1.0, -1.0), summary(1.2, -0.7), summary(0.9, -1.4)};
  const LemmaReport r = verify_variance_lemmas(set, set, set);
  EXPECT_FALSE(r.insufficient);
  for (int c = 0; c < 2; ++c) {
    EXPECT_TRUE(r.wgp_le_gp[static_cast<std::size_t>(c)]);
    EXPECT_TRUE(r.wsrgp_le_gp[static_cast<std::size_t>(c)]);
    EXPECT_TRUE(r.wsrgp_le_wgp[static_cast<std::size_t>(c)]);
    EXPECT_EQ(r.gp.variance[static_cast<std::size_t>(c)], r.wgp.variance[static_cast<std::size_t>(c)]);
  }
}

TEST(BoundedWeighting, AcceptedSubsetShrinksVariance) {
  // Core near the bounds plus outliers far outside the two-sigma band.
  const ApproxBounds b = ApproxBounds::both(1.0, 0.04, -1.0, 0.25);
  std::vector<SampleSummary> gp{summary(1.1, -1.2), summary(0.9, -0.8), summary(1.0, -1.0), summary(1.25, -1.5),
                                summary(0.8, -0.6), summary(3.0, -4.0), summary(-1.0, 2.0), summary(2.5, -3.0)};
  const std::vector<SampleSummary> wgp = accepted_subset(b, gp);
  ASSERT_EQ(wgp.size(), 5u);
  // Direct variances of the constructed sets.
  auto var = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  const LemmaReport r = verify_variance_lemmas(gp, wgp, wgp, b);
  EXPECT_NEAR(r.gp.variance[1], var({1.1, 0.9, 1.0, 1.25, 0.8, 3.0, -1.0, 2.5}), 1e-12);
  EXPECT_NEAR(r.wgp.variance[0], var({-1.2, -0.8, -1.0, -1.5, -0.6}), 1e-12);
  EXPECT_TRUE(r.wgp_le_gp[0]);
  EXPECT_TRUE(r.wgp_le_gp[1]);
  EXPECT_DOUBLE_EQ(r.band_bound[0], 4.0 * 0.25);
  EXPECT_DOUBLE_EQ(r.band_bound[1], 4.0 * 0.04);
}

TEST(BoundedWeighting, AcceptedVarianceRespectsBandBound) {
  Rng rng(6);
  const ApproxBounds b = ApproxBounds::both(0.0, 0.09, -3.0, 0.36);
  std::vector<SampleSummary> all;
  for (int m = 0; m < 3000; ++m) all.push_back(summary(standard_normal(rng), -3.0 + 2.0 * standard_normal(rng)));
  const std::vector<SampleSummary> acc = accepted_subset(b, all);
  const LemmaReport r = verify_variance_lemmas(all, acc, acc, b);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_LE(r.wgp.variance[c], r.band_bound[c]);
    EXPECT_LE(r.wgp.range_bound[c], r.band_bound[c] * (1.0 + 1e-12));
  }
}

TEST(BoundedWeighting, TooFewAcceptedSamplesAreFlagged) {
  std::vector<SampleSummary> gp{summary(1.0, -1.0), summary(1.2, -0.7)};
  std::vector<SampleSummary> one{summary(1.0, -1.0)};
  EXPECT_TRUE(verify_variance_lemmas(gp, one, gp).insufficient);
}

}  // namespace
