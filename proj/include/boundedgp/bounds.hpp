#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "rff.hpp"
#include "stats.hpp"

namespace bgp {

/// Approximate knowledge of the objective's max and/or min, each treated as
/// a Gaussian with the given looseness variance.
struct ApproxBounds {
  std::optional<double> f_plus;
  double eta_plus_sq = 1.0;
  std::optional<double> f_minus;
  double eta_minus_sq = 1.0;

  static ApproxBounds upper(double f_plus, double eta_plus_sq) {
    ApproxBounds b;
    b.f_plus = f_plus;
    b.eta_plus_sq = eta_plus_sq;
    b.f_minus.reset();
    b.validate();
    return b;
  }
  static ApproxBounds both(double f_plus, double eta_plus_sq, double f_minus, double eta_minus_sq) {
    ApproxBounds b{f_plus, eta_plus_sq, f_minus, eta_minus_sq};
    b.validate();
    return b;
  }

  bool has_upper() const { return f_plus.has_value(); }
  bool has_lower() const { return f_minus.has_value(); }

  void validate() const {
    if (!f_plus && !f_minus) throw InvalidArgument("bounds: at least one of f_plus, f_minus is required");
    if (f_plus && f_minus && !(*f_plus > *f_minus)) throw InvalidArgument("bounds: f_plus must exceed f_minus");
    if (f_plus && !(eta_plus_sq > 0.0)) throw InvalidArgument("bounds: eta_plus_sq must be positive");
    if (f_minus && !(eta_minus_sq > 0.0)) throw InvalidArgument("bounds: eta_minus_sq must be positive");
  }
};

/// Raw log weights below this are treated as exactly zero weight.
inline constexpr double kLogWeightFloor = -700.0;

/// log pi(g): Gaussian log density of the sample extrema under the bound prior,
/// using only the coordinates whose bound is present.
inline double log_weight(const ApproxBounds& b, const SampleSummary& s) {
  double lw = 0.0;
  if (b.f_plus) lw += normal_logpdf(s.g_max, *b.f_plus, b.eta_plus_sq);
  if (b.f_minus) lw += normal_logpdf(s.g_min, *b.f_minus, b.eta_minus_sq);
  return lw;
}

inline double weight(const ApproxBounds& b, const SampleSummary& s) {
  return std::exp(log_weight(b, s));
}

/// Closed two-standard-deviation band on every present coordinate.
inline bool accept(const ApproxBounds& b, const SampleSummary& s) {
  auto within = [](double g, double f, double eta_sq) {
    return std::abs(g - f) <= 2.0 * std::sqrt(eta_sq) + 1e-12 * std::max(1.0, std::abs(f));
  };
  if (b.f_plus && !within(s.g_max, *b.f_plus, b.eta_plus_sq)) return false;
  if (b.f_minus && !within(s.g_min, *b.f_minus, b.eta_minus_sq)) return false;
  return true;
}

inline int count_accepted(const ApproxBounds& b, const std::vector<SampleSummary>& summaries) {
  return static_cast<int>(std::count_if(summaries.begin(), summaries.end(),
                                        [&](const SampleSummary& s) { return accept(b, s); }));
}

/// Fills `log_weight` and the normalized `weight` of every summary.
/// Normalization happens in log space after subtracting the largest admissible
/// log weight. Returns the number of samples with nonzero weight; when it is
/// zero all weights are zero.
inline int assign_weights(const ApproxBounds& b, std::vector<SampleSummary>& summaries) {
  double top = -std::numeric_limits<double>::infinity();
  for (auto& s : summaries) {
    s.log_weight = log_weight(b, s);
    if (s.log_weight >= kLogWeightFloor) top = std::max(top, s.log_weight);
  }
  int admissible = 0;
  double total = 0.0;
  for (auto& s : summaries) {
    if (s.log_weight >= kLogWeightFloor) {
      s.weight = std::exp(s.log_weight - top);
      total += s.weight;
      ++admissible;
    } else {
      s.weight = 0.0;
    }
  }
  if (total > 0.0) {
    for (auto& s : summaries) s.weight /= total;
  }
  return admissible;
}

inline Eigen::VectorXd weights_of(const std::vector<SampleSummary>& summaries) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(summaries.size()));
  for (std::size_t i = 0; i < summaries.size(); ++i) w[static_cast<Eigen::Index>(i)] = summaries[i].weight;
  return w;
}

/// sum_m w_m g_m(x) / sum_m w_m.
inline double weighted_aggregate(const std::vector<PosteriorSample>& samples, const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& x) {
  if (static_cast<Eigen::Index>(samples.size()) != weights.size()) {
    throw DimensionMismatch("weighted_aggregate: sample and weight counts differ");
  }
  if ((weights.array() < 0.0).any()) throw InvalidArgument("weighted_aggregate: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw NoAdmissibleSample("every sample has zero weight");
  double acc = 0.0;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const double w = weights[static_cast<Eigen::Index>(m)];
    if (w > 0.0) acc += w * samples[m](x);
  }
  return acc / total;
}

/// Indices of the m_prime heaviest samples (weight, then log weight), ties to the lower index.
inline std::vector<int> rank_select(const std::vector<SampleSummary>& summaries, int m_prime) {
  const int M = static_cast<int>(summaries.size());
  if (m_prime < 0 || m_prime > M) throw InvalidArgument("rank_select: m_prime must be in [0, M]");
  std::vector<int> idx(static_cast<std::size_t>(M));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& sa = summaries[static_cast<std::size_t>(a)];
    const auto& sb = summaries[static_cast<std::size_t>(b)];
    if (sa.weight != sb.weight) return sa.weight > sb.weight;
    return sa.log_weight > sb.log_weight;
  });
  idx.resize(static_cast<std::size_t>(m_prime));
  return idx;
}

inline std::vector<SampleSummary> accepted_subset(const ApproxBounds& b, const std::vector<SampleSummary>& summaries) {
  std::vector<SampleSummary> out;
  for (const auto& s : summaries) {
    if (accept(b, s)) out.push_back(s);
  }
  return out;
}

/// Per-coordinate statistics of one summary set; coordinate 0 is g_min, 1 is g_max.
struct ExtremaSpread {
  int count = 0;
  std::array<double, 2> variance{};
  std::array<double, 2> range_bound{};  // (max - min)^2 / 4 over the set
};

struct LemmaReport {
  ExtremaSpread gp, wgp, wsrgp;
  std::array<bool, 2> wgp_le_gp{};
  std::array<bool, 2> wsrgp_le_gp{};
  std::array<bool, 2> wsrgp_le_wgp{};
  std::array<double, 2> band_bound{};  // 4 eta^2 per coordinate when bounds were supplied
  bool insufficient = false;
};

inline ExtremaSpread spread_of(const std::vector<SampleSummary>& set) {
  ExtremaSpread s;
  s.count = static_cast<int>(set.size());
  for (int c = 0; c < 2; ++c) {
    std::vector<double> v;
    v.reserve(set.size());
    for (const auto& x : set) v.push_back(c == 0 ? x.g_min : x.g_max);
    s.variance[static_cast<std::size_t>(c)] = sample_variance(v);
    if (!v.empty()) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      s.range_bound[static_cast<std::size_t>(c)] = 0.25 * (*hi - *lo) * (*hi - *lo);
    }
  }
  return s;
}

/// Compares extrema variances of the unweighted GP set with the accepted GP
/// and accepted SRGP sets.
inline LemmaReport verify_variance_lemmas(const std::vector<SampleSummary>& gp,
                                          const std::vector<SampleSummary>& wgp,
                                          const std::vector<SampleSummary>& wsrgp,
                                          const std::optional<ApproxBounds>& bounds = std::nullopt) {
  LemmaReport r;
  r.gp = spread_of(gp);
  r.wgp = spread_of(wgp);
  r.wsrgp = spread_of(wsrgp);
  r.insufficient = r.gp.count < 2 || r.wgp.count < 2 || r.wsrgp.count < 2;
  for (std::size_t c = 0; c < 2; ++c) {
    const double g = r.gp.variance[c], w = r.wgp.variance[c], s = r.wsrgp.variance[c];
    r.wgp_le_gp[c] = w <= g;
    r.wsrgp_le_gp[c] = s <= g;
    r.wsrgp_le_wgp[c] = s <= w;
  }
  if (bounds) {
    r.band_bound[0] = bounds->f_minus ? 4.0 * bounds->eta_minus_sq : std::numeric_limits<double>::infinity();
    r.band_bound[1] = bounds->f_plus ? 4.0 * bounds->eta_plus_sq : std::numeric_limits<double>::infinity();
  } else {
    r.band_bound = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  return r;
}

}  // namespace bgp
