#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "../benchmarks.hpp"
#include "../bo.hpp"
#include "../bounds.hpp"
#include "../dataset.hpp"
#include "../gp.hpp"
#include "../parallel.hpp"
#include "../qmc.hpp"
#include "../rff.hpp"
#include "../srgp.hpp"
#include "../stats.hpp"
#include "config.hpp"
#include "csv.hpp"

namespace bgp::harness {

// Stream identifiers for per-repetition random streams.
namespace stream {
inline constexpr std::uint64_t training = 11;
inline constexpr std::uint64_t gp_fit = 12;
inline constexpr std::uint64_t gp_samples = 13;
inline constexpr std::uint64_t srgp_fit = 14;
inline constexpr std::uint64_t srgp_samples = 15;
inline constexpr std::uint64_t misspec_signs = 16;
inline constexpr std::uint64_t warped_fit = 17;
inline constexpr std::uint64_t warped_samples = 18;
}  // namespace stream

inline std::uint64_t rep_seed(const ExperimentConfig& c, int rep) { return c.seed + static_cast<std::uint64_t>(rep); }

inline int worker_count() { return default_workers(); }

inline KernelConfig initial_kernel(const ExperimentConfig& c, int d) {
  return KernelConfig::isotropic(d, 0.2, 1.0, 1e-4, kernel_family_from_string(c.kernel));
}

inline FitOptions fit_options(const ExperimentConfig& c, std::uint64_t seed, std::uint64_t s) {
  FitOptions f;
  f.optimize_hypers = c.optimize_hypers;
  f.seed = mix_seed(seed, s);
  return f;
}

inline SamplingOptions sampling_options(const ExperimentConfig& c) {
  SamplingOptions s;
  s.features = c.features;
  s.extrema.refine = c.extrema_refine;
  return s;
}

/// N uniform training inputs and their standardized maximization-form outputs.
inline Dataset training_set(const BenchmarkFunction& fn, int n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, stream::training));
  Eigen::MatrixXd X(n, fn.d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < fn.d; ++j) X(i, j) = uniform01(rng);
    y[i] = fn.evaluate(X.row(i).transpose());
  }
  return Dataset::from_unit(X, y);
}

/// Exact bounds in the dataset's standardized space.
inline ApproxBounds exact_bounds(const BenchmarkFunction& fn, const Dataset& ds, double eta_plus_sq,
                                 double eta_minus_sq) {
  const StandardizedOptima t = true_bounds(fn, ds.y_mean, ds.y_std);
  return ApproxBounds::both(t.f_max, eta_plus_sq, t.f_min, eta_minus_sq);
}

inline ApproxBounds upper_only(const ApproxBounds& b) {
  ApproxBounds u = b;
  u.f_minus.reset();
  return u;
}

/// Fitted f-space GP and its M summarized samples for one repetition.
struct GpDraw {
  std::optional<FittedGP> gp;
  SampleBatch batch;
};

inline GpDraw draw_gp(const ExperimentConfig& c, const Dataset& ds, std::uint64_t seed, int M) {
  GpDraw g;
  g.gp.emplace(fit_gp(ds, initial_kernel(c, ds.dim()), fit_options(c, seed, stream::gp_fit)));
  Rng rng(mix_seed(seed, stream::gp_samples));
  g.batch = draw_summarized(*g.gp, M, rng, TransformSpec::identity(), sampling_options(c));
  return g;
}

/// Square-root GP for the upper bound of `b`, with M summarized mapped samples.
inline SampleBatch draw_srgp(const ExperimentConfig& c, const Dataset& ds, const ApproxBounds& b, std::uint64_t seed,
                             int M) {
  const TransformSpec spec = sqrt_transform(b);
  const FittedGP gp_h = fit_latent_gp(ds, spec, initial_kernel(c, ds.dim()), fit_options(c, seed, stream::srgp_fit));
  Rng rng(mix_seed(seed, stream::srgp_samples));
  return draw_summarized(gp_h, M, rng, spec, sampling_options(c));
}

// ---------------------------------------------------------------- accept-ratio

struct AcceptRun {
  std::string function;
  double eta_scale = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  double gp_ratio = std::numeric_limits<double>::quiet_NaN();
  double srgp_ratio = std::numeric_limits<double>::quiet_NaN();
  LemmaReport lemma;
  std::string status = "ok";
};

struct ExperimentOutput {
  std::string kind;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file suffix, table
};

struct AcceptRatioResult {
  std::vector<AcceptRun> runs;
  ExperimentOutput output;

  /// Mean acceptance over successful repetitions.
  double mean(const std::string& function, double eta_scale, bool srgp) const {
    std::vector<double> v;
    for (const auto& r : runs) {
      if (r.function == function && r.eta_scale == eta_scale && r.status == "ok") v.push_back(srgp ? r.srgp_ratio : r.gp_ratio);
    }
    return mean_of(v);
  }
};

inline std::vector<AcceptRun> accept_ratio_rep(const ExperimentConfig& c, const std::string& function, int rep) {
  const BenchmarkFunction fn = make_benchmark(function);
  const std::uint64_t seed = rep_seed(c, rep);
  std::vector<AcceptRun> out;
  for (double e : c.eta) {
    AcceptRun r;
    r.function = fn.name;
    r.eta_scale = e;
    r.rep = rep;
    r.seed = seed;
    out.push_back(r);
  }
  try {
    const Dataset ds = training_set(fn, c.n_train_per_dim.front() * fn.d, seed);
    const GpDraw g = draw_gp(c, ds, seed, c.samples);
    for (auto& r : out) {
      const double eta = r.eta_scale * fn.d;
      const ApproxBounds b = exact_bounds(fn, ds, eta * eta, eta * eta);
      const SampleBatch s = draw_srgp(c, ds, b, seed, c.samples);
      const auto gp_acc = accepted_subset(b, g.batch.summaries);
      const auto srgp_acc = accepted_subset(b, s.summaries);
      r.gp_ratio = static_cast<double>(gp_acc.size()) / c.samples;
      r.srgp_ratio = static_cast<double>(srgp_acc.size()) / c.samples;
      r.lemma = verify_variance_lemmas(g.batch.summaries, gp_acc, srgp_acc, b);
    }
  } catch (const Error& e) {
    for (auto& r : out) r.status = std::string("failed:") + e.kind();
  }
  return out;
}

/// Minimum accepted-set size for the lemma inequalities to be checked.
inline constexpr int kLemmaMinMembers = 5;

inline bool lemma_checked(const LemmaReport& l) {
  return l.gp.count >= kLemmaMinMembers && l.wgp.count >= kLemmaMinMembers && l.wsrgp.count >= kLemmaMinMembers;
}

inline AcceptRatioResult run_accept_ratio(const ExperimentConfig& c) {
  c.validate();
  const std::string hash = config_hash(c);
  const int F = static_cast<int>(c.functions.size());
  std::vector<std::vector<AcceptRun>> per_task(static_cast<std::size_t>(F * c.repetitions));
  parallel_for(F * c.repetitions, worker_count(), [&](int task) {
    per_task[static_cast<std::size_t>(task)] =
        accept_ratio_rep(c, c.functions[static_cast<std::size_t>(task / c.repetitions)], task % c.repetitions);
  });

  AcceptRatioResult res;
  for (auto& v : per_task) {
    for (auto& r : v) res.runs.push_back(std::move(r));
  }

  CsvTable runs;
  runs.columns = {"function", "eta", "rep", "seed", "gp_accept", "srgp_accept", "gp_n", "wgp_n", "wsrgp_n",
                  "gp_var_gmin", "gp_var_gmax", "wgp_var_gmin", "wgp_var_gmax", "wsrgp_var_gmin",
                  "wsrgp_var_gmax", "lemma_checked", "wgp_le_gp", "wsrgp_le_wgp", "status", "config_hash"};
  for (const auto& r : res.runs) {
    const auto& l = r.lemma;
    runs.add(r.function, r.eta_scale, r.rep, static_cast<unsigned long long>(r.seed), r.gp_ratio, r.srgp_ratio,
             l.gp.count, l.wgp.count, l.wsrgp.count, l.gp.variance[0], l.gp.variance[1], l.wgp.variance[0],
             l.wgp.variance[1], l.wsrgp.variance[0], l.wsrgp.variance[1], lemma_checked(l) ? 1 : 0,
             (l.wgp_le_gp[0] && l.wgp_le_gp[1]) ? 1 : 0, (l.wsrgp_le_wgp[0] && l.wsrgp_le_wgp[1]) ? 1 : 0, r.status,
             hash);
  }

  CsvTable summary;
  summary.columns = {"function", "eta", "sampler", "mean", "std", "reps", "failed", "seed_base", "config_hash"};
  for (const auto& f : c.functions) {
    const std::string name = make_benchmark(f).name;
    for (double e : c.eta) {
      for (bool srgp : {false, true}) {
        std::vector<double> v;
        int failed = 0;
        for (const auto& r : res.runs) {
          if (r.function != name || r.eta_scale != e) continue;
          if (r.status == "ok") {
            v.push_back(srgp ? r.srgp_ratio : r.gp_ratio);
          } else {
            ++failed;
          }
        }
        summary.add(name, e, srgp ? "srgp" : "gp", mean_of(v), sample_std(v), static_cast<int>(v.size()), failed,
                    static_cast<unsigned long long>(c.seed), hash);
      }
    }
  }
  res.output.kind = to_string(c.kind);
  res.output.tables = {{"", std::move(summary)}, {"_runs", std::move(runs)}};
  return res;
}

// ------------------------------------------------------------- sampling RMSE

enum class Variant { gp, wgp_upper, wgp_both, wsrgp_upper, wsrgp_both, sinusoidal, sigmoid };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::gp: return "gp";
    case Variant::wgp_upper: return "w-gp-f+";
    case Variant::wgp_both: return "w-gp-f+f-";
    case Variant::wsrgp_upper: return "w-srgp-f+";
    case Variant::wsrgp_both: return "w-srgp-f+f-";
    case Variant::sinusoidal: return "sinusoidal";
    case Variant::sigmoid: return "sigmoid";
  }
  return "unknown";
}

inline const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::gp,         Variant::wgp_upper,  Variant::wgp_both, Variant::wsrgp_upper,
                                      Variant::wsrgp_both, Variant::sinusoidal, Variant::sigmoid};
  return v;
}

struct RmseRow {
  std::string function;
  int n_train = 0;
  double eta_sq = 0.0;
  int M = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  Variant variant = Variant::gp;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  int accepted = 0;
  std::string status = "ok";
};

struct SamplingResult {
  std::vector<RmseRow> rows;
  ExperimentOutput output;

  double mean(const std::function<bool(const RmseRow&)>& pred) const {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.status == "ok" && pred(r)) v.push_back(r.rmse);
    }
    return mean_of(v);
  }
  double mean(const std::string& function, int n_train, Variant variant) const {
    return mean([&](const RmseRow& r) { return r.function == function && r.n_train == n_train && r.variant == variant; });
  }
};

/// Ground truth on the fixed test grid, in the dataset's standardized units.
struct TestGrid {
  Eigen::MatrixXd points;
  Eigen::VectorXd truth;
};

inline TestGrid test_grid(const BenchmarkFunction& fn, const Dataset& ds, int n) {
  TestGrid g;
  g.points = halton_points(n, fn.d);
  g.truth.resize(n);
  for (int i = 0; i < n; ++i) g.truth[i] = ds.standardize(fn.evaluate(g.points.row(i).transpose()));
  return g;
}

inline double sample_rmse(const PosteriorSample& s, const TestGrid& g) {
  return std::sqrt((s.evaluate_batch(g.points) - g.truth).squaredNorm() / static_cast<double>(g.truth.size()));
}

/// Mean per-sample RMSE of the selected samples.
inline double mean_rmse(const std::vector<PosteriorSample>& samples, const std::vector<int>& idx, const TestGrid& g) {
  double s = 0.0;
  for (int i : idx) s += sample_rmse(samples[static_cast<std::size_t>(i)], g);
  return s / static_cast<double>(idx.size());
}

inline std::vector<int> first_indices(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

/// RMSE of the rank-selected M' samples of `batch` under `bounds`.
inline double weighted_rmse(const SampleBatch& batch, const ApproxBounds& bounds, int m_prime, int M, const TestGrid& g,
                            int* accepted = nullptr) {
  std::vector<SampleSummary> sums(batch.summaries.begin(), batch.summaries.begin() + M);
  assign_weights(bounds, sums);
  if (accepted) *accepted = count_accepted(bounds, sums);
  return mean_rmse(batch.samples, rank_select(sums, m_prime), g);
}

/// Latent GP through a bounded warping, first M' samples.
inline double warped_rmse(const ExperimentConfig& c, const Dataset& ds, const TransformSpec& spec, std::uint64_t seed,
                          int m_prime, const TestGrid& g) {
  const FittedGP gp = fit_latent_gp(ds, spec, initial_kernel(c, ds.dim()), fit_options(c, seed, stream::warped_fit));
  Rng rng(mix_seed(seed, stream::warped_samples + static_cast<std::uint64_t>(spec.kind) * 100));
  double s = 0.0;
  for (int m = 0; m < m_prime; ++m) s += sample_rmse(draw_sample(gp, c.features, rng, spec), g);
  return s / m_prime;
}

/// One repetition: every requested variant under the given bounds.
inline std::vector<RmseRow> rmse_rep(const ExperimentConfig& c, const BenchmarkFunction& fn, int n_train, int rep,
                                     const std::vector<Variant>& variants, const std::vector<double>& eta_sq_values,
                                     bool misspecified) {
  const std::uint64_t seed = rep_seed(c, rep);
  std::vector<RmseRow> rows;
  auto push_failed = [&](const std::string& status) {
    rows.clear();
    for (double e : eta_sq_values) {
      for (Variant v : variants) {
        RmseRow r;
        r.function = fn.name;
        r.n_train = n_train;
        r.eta_sq = e;
        r.M = c.samples;
        r.rep = rep;
        r.seed = seed;
        r.variant = v;
        r.status = status;
        rows.push_back(r);
      }
    }
  };
  try {
    const Dataset ds = training_set(fn, n_train, seed);
    const TestGrid grid = test_grid(fn, ds, c.test_points);
    const GpDraw g = draw_gp(c, ds, seed, c.samples);
    const StandardizedOptima truth = true_bounds(fn, ds.y_mean, ds.y_std);
    Rng sign_rng(mix_seed(seed, stream::misspec_signs));
    const MisspecSigns signs = MisspecSigns::draw(sign_rng);
    const Looseness loose = c.looseness(fn.d);
    std::optional<double> gp_rmse;
    for (double e : eta_sq_values) {
      const ApproxBounds both = misspecify(truth, misspecified ? e : 0.0, signs, loose);
      std::optional<SampleBatch> srgp;
      for (Variant v : variants) {
        RmseRow r;
        r.function = fn.name;
        r.n_train = n_train;
        r.eta_sq = e;
        r.M = c.samples;
        r.rep = rep;
        r.seed = seed;
        r.variant = v;
        switch (v) {
          case Variant::gp:
            if (!gp_rmse) gp_rmse = mean_rmse(g.batch.samples, first_indices(c.select), grid);
            r.rmse = *gp_rmse;
            break;
          case Variant::wgp_upper:
            r.rmse = weighted_rmse(g.batch, upper_only(both), c.select, c.samples, grid, &r.accepted);
            break;
          case Variant::wgp_both:
            r.rmse = weighted_rmse(g.batch, both, c.select, c.samples, grid, &r.accepted);
            break;
          case Variant::wsrgp_upper:
          case Variant::wsrgp_both:
            if (!srgp) srgp = draw_srgp(c, ds, both, seed, c.samples);
            r.rmse = weighted_rmse(*srgp, v == Variant::wsrgp_upper ? upper_only(both) : both, c.select, c.samples, grid,
                                   &r.accepted);
            break;
          case Variant::sinusoidal:
            r.rmse = warped_rmse(c, ds, TransformSpec::sinusoidal(*both.f_plus, *both.f_minus), seed, c.select, grid);
            break;
          case Variant::sigmoid:
            r.rmse = warped_rmse(c, ds, TransformSpec::sigmoid(*both.f_plus, *both.f_minus), seed, c.select, grid);
            break;
        }
        rows.push_back(r);
      }
    }
  } catch (const Error& e) {
    push_failed(std::string("failed:") + e.kind());
  }
  return rows;
}

inline CsvTable rmse_runs_table(const std::vector<RmseRow>& rows, const std::string& hash) {
  CsvTable t;
  t.columns = {"function", "n_train", "eta_sq", "M", "variant", "rep", "seed", "rmse", "accepted", "status", "config_hash"};
  for (const auto& r : rows) {
    t.add(r.function, r.n_train, r.eta_sq, r.M, to_string(r.variant), r.rep, static_cast<unsigned long long>(r.seed),
          r.rmse, r.accepted, r.status, hash);
  }
  return t;
}

/// Mean, standard deviation and standard error per (function, n_train, eta_sq, M, variant).
inline CsvTable rmse_summary_table(const std::vector<RmseRow>& rows, const std::string& hash, std::uint64_t seed_base) {
  using Key = std::tuple<std::string, int, double, int, int>;
  std::vector<Key> order;
  std::map<Key, std::pair<std::vector<double>, int>> groups;
  for (const auto& r : rows) {
    const Key k{r.function, r.n_train, r.eta_sq, r.M, static_cast<int>(r.variant)};
    if (!groups.count(k)) order.push_back(k);
    auto& g = groups[k];
    if (r.status == "ok") {
      g.first.push_back(r.rmse);
    } else {
      ++g.second;
    }
  }
  CsvTable t;
  t.columns = {"function", "n_train", "eta_sq", "M", "variant", "mean", "std", "stderr", "reps", "failed", "seed_base",
               "config_hash"};
  for (const auto& k : order) {
    const auto& [v, failed] = groups[k];
    const double sd = sample_std(v);
    t.add(std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), to_string(static_cast<Variant>(std::get<4>(k))),
          mean_of(v), sd, sd / std::sqrt(static_cast<double>(std::max<std::size_t>(v.size(), 1))),
          static_cast<int>(v.size()), failed, static_cast<unsigned long long>(seed_base), hash);
  }
  return t;
}

inline SamplingResult run_sampling_rmse(const ExperimentConfig& c, std::vector<Variant> variants = all_variants()) {
  c.validate();
  const std::string hash = config_hash(c);
  struct Task {
    std::string function;
    int n_train;
    int rep;
  };
  std::vector<Task> tasks;
  for (const auto& f : c.functions) {
    const int d = make_benchmark(f).d;
    for (int k : c.n_train_per_dim) {
      for (int r = 0; r < c.repetitions; ++r) tasks.push_back({f, k * d, r});
    }
  }
  std::vector<std::vector<RmseRow>> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), worker_count(), [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = rmse_rep(c, make_benchmark(t.function), t.n_train, t.rep, variants, {0.0}, false);
  });
  SamplingResult res;
  for (auto& v : out) {
    for (auto& r : v) res.rows.push_back(std::move(r));
  }
  res.output.kind = to_string(c.kind);
  res.output.tables = {{"", rmse_summary_table(res.rows, hash, c.seed)}, {"_runs", rmse_runs_table(res.rows, hash)}};
  return res;
}

/// Sampling RMSE as the bounds are misspecified by eta^2 (first N_train multiplier).
inline SamplingResult run_misspec_sampling(const ExperimentConfig& c,
                                           std::vector<Variant> variants = {Variant::gp, Variant::wgp_upper,
                                                                            Variant::wgp_both, Variant::wsrgp_upper,
                                                                            Variant::wsrgp_both}) {
  c.validate();
  const std::string hash = config_hash(c);
  const int F = static_cast<int>(c.functions.size());
  std::vector<std::vector<RmseRow>> out(static_cast<std::size_t>(F * c.repetitions));
  parallel_for(F * c.repetitions, worker_count(), [&](int i) {
    const BenchmarkFunction fn = make_benchmark(c.functions[static_cast<std::size_t>(i / c.repetitions)]);
    out[static_cast<std::size_t>(i)] =
        rmse_rep(c, fn, c.n_train_per_dim.front() * fn.d, i % c.repetitions, variants, c.eta, true);
  });
  SamplingResult res;
  for (auto& v : out) {
    for (auto& r : v) res.rows.push_back(std::move(r));
  }
  res.output.kind = to_string(c.kind);
  res.output.tables = {{"", rmse_summary_table(res.rows, hash, c.seed)}, {"_runs", rmse_runs_table(res.rows, hash)}};
  return res;
}

/// Sampling RMSE as the number of drawn samples M varies. Smaller M reuse the
/// leading samples of the largest draw; M' = min(select, M / 2).
inline SamplingResult run_m_sweep(const ExperimentConfig& c) {
  c.validate();
  const std::string hash = config_hash(c);
  const int F = static_cast<int>(c.functions.size());
  const int M_max = *std::max_element(c.m_values.begin(), c.m_values.end());
  std::vector<std::vector<RmseRow>> out(static_cast<std::size_t>(F * c.repetitions));
  parallel_for(F * c.repetitions, worker_count(), [&](int i) {
    const BenchmarkFunction fn = make_benchmark(c.functions[static_cast<std::size_t>(i / c.repetitions)]);
    const int rep = i % c.repetitions;
    const std::uint64_t seed = rep_seed(c, rep);
    const int n_train = c.n_train_per_dim.front() * fn.d;
    auto& rows = out[static_cast<std::size_t>(i)];
    try {
      const Dataset ds = training_set(fn, n_train, seed);
      const TestGrid grid = test_grid(fn, ds, c.test_points);
      const ApproxBounds b = exact_bounds(fn, ds, c.looseness(fn.d).eta_plus_sq, c.looseness(fn.d).eta_minus_sq);
      const GpDraw g = draw_gp(c, ds, seed, M_max);
      const SampleBatch s = draw_srgp(c, ds, b, seed, M_max);
      for (int M : c.m_values) {
        const int mp = std::min(c.select, M / 2);
        for (Variant v : {Variant::wgp_both, Variant::wsrgp_both}) {
          RmseRow r;
          r.function = fn.name;
          r.n_train = n_train;
          r.M = M;
          r.rep = rep;
          r.seed = seed;
          r.variant = v;
          r.rmse = weighted_rmse(v == Variant::wgp_both ? g.batch : s, b, mp, M, grid, &r.accepted);
          rows.push_back(r);
        }
      }
    } catch (const Error& e) {
      rows.clear();
      for (int M : c.m_values) {
        for (Variant v : {Variant::wgp_both, Variant::wsrgp_both}) {
          RmseRow r;
          r.function = fn.name;
          r.n_train = n_train;
          r.M = M;
          r.rep = rep;
          r.seed = seed;
          r.variant = v;
          r.status = std::string("failed:") + e.kind();
          rows.push_back(r);
        }
      }
    }
  });
  SamplingResult res;
  for (auto& v : out) {
    for (auto& r : v) res.rows.push_back(std::move(r));
  }
  res.output.kind = to_string(c.kind);
  res.output.tables = {{"", rmse_summary_table(res.rows, hash, c.seed)}, {"_runs", rmse_runs_table(res.rows, hash)}};
  return res;
}

// ------------------------------------------------------------------------ BO

struct BoRun {
  std::string function;
  std::string acquisition;
  double eta_sq = 0.0;
  int rep = 0;
  BoTrace trace;
};

struct BoResult {
  std::vector<BoRun> runs;
  ExperimentOutput output;

  std::vector<double> final_regrets(const std::string& function, const std::string& acq, double eta_sq = 0.0) const {
    std::vector<double> v;
    for (const auto& r : runs) {
      if (r.function == function && r.acquisition == acq && r.eta_sq == eta_sq && !r.trace.failed) {
        v.push_back(r.trace.final_regret());
      }
    }
    return v;
  }
  double median_final_regret(const std::string& function, const std::string& acq, double eta_sq = 0.0) const {
    return median_of(final_regrets(function, acq, eta_sq));
  }
};

inline BoConfig bo_config(const ExperimentConfig& c, const std::string& function, const std::string& acq, double eta_sq,
                          int rep) {
  BoConfig b;
  b.function = function;
  b.acquisition = acquisition_from_string(acq);
  b.iterations = c.iterations;
  b.samples = c.samples;
  b.features = c.features;
  b.seed = rep_seed(c, rep);
  b.eta_sq = eta_sq;
  b.kernel = kernel_family_from_string(c.kernel);
  b.optimize_hypers = c.optimize_hypers;
  b.record_timing = c.record_timing;
  b.extrema.refine = c.extrema_refine;
  return b;
}

inline BoResult run_bo_experiment(const ExperimentConfig& c, const std::vector<double>& eta_sq_values) {
  c.validate();
  const std::string hash = config_hash(c);
  std::vector<BoRun> runs;
  for (const auto& f : c.functions) {
    for (double e : eta_sq_values) {
      for (const auto& a : c.acquisitions) {
        for (int r = 0; r < c.repetitions; ++r) runs.push_back({make_benchmark(f).name, a, e, r, {}});
      }
    }
  }
  parallel_for(static_cast<int>(runs.size()), worker_count(), [&](int i) {
    auto& run = runs[static_cast<std::size_t>(i)];
    run.trace = run_bo(bo_config(c, run.function, run.acquisition, run.eta_sq, run.rep));
  });

  CsvTable iters;
  iters.columns = {"function", "acquisition", "eta_sq", "rep", "seed", "t", "x", "y", "used", "accepted", "regret",
                   "inferred_x", "inferred_regret", "seconds", "config_hash"};
  auto point = [](const Eigen::VectorXd& x) {
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ";" : "") + fmt(x[i]);
    return s;
  };
  for (const auto& r : runs) {
    for (const auto& rec : r.trace.records) {
      iters.add(r.function, r.acquisition, r.eta_sq, r.rep, static_cast<unsigned long long>(r.trace.seed), rec.t,
                point(rec.x), rec.y, rec.acquisition, rec.accepted, rec.regret, point(rec.inferred_x),
                rec.inferred_regret, rec.seconds, hash);
    }
    if (r.trace.failed) {
      iters.add(r.function, r.acquisition, r.eta_sq, r.rep, static_cast<unsigned long long>(r.trace.seed), -1, "",
                std::numeric_limits<double>::quiet_NaN(), "failed:" + r.trace.error_kind, 0,
                std::numeric_limits<double>::quiet_NaN(), "", std::numeric_limits<double>::quiet_NaN(), 0.0, hash);
    }
  }

  CsvTable summary;
  summary.columns = {"function", "acquisition", "eta_sq", "median_final_regret", "mean_final_regret",
                     "std_final_regret", "median_inferred_regret", "fallback_iterations", "reps", "failed",
                     "seed_base", "config_hash"};
  BoResult res;
  res.runs = std::move(runs);
  for (const auto& f : c.functions) {
    const std::string name = make_benchmark(f).name;
    for (double e : eta_sq_values) {
      for (const auto& a : c.acquisitions) {
        std::vector<double> fin, inf;
        int fallbacks = 0, failed = 0;
        for (const auto& r : res.runs) {
          if (r.function != name || r.acquisition != a || r.eta_sq != e) continue;
          if (r.trace.failed) {
            ++failed;
            continue;
          }
          fin.push_back(r.trace.final_regret());
          inf.push_back(r.trace.records.back().inferred_regret);
          fallbacks += r.trace.fallback_count();
        }
        summary.add(name, a, e, median_of(fin), mean_of(fin), sample_std(fin), median_of(inf), fallbacks,
                    static_cast<int>(fin.size()), failed, static_cast<unsigned long long>(c.seed), hash);
      }
    }
  }
  res.output.kind = to_string(c.kind);
  res.output.tables = {{"", std::move(summary)}, {"_iterations", std::move(iters)}};
  return res;
}

inline BoResult run_bo_regret(const ExperimentConfig& c) { return run_bo_experiment(c, {0.0}); }

// -------------------------------------------------------------------- output

inline std::vector<std::string> header_block(const ExperimentConfig& c) {
  return {
      "boundedgp " + std::string(kCodeVersion),
      "experiment: " + to_string(c.kind),
      "config_hash: " + config_hash(c),
      "base_seed: " + std::to_string(c.seed) + " (repetition r uses base_seed + r)",
      "kernel: " + c.kernel + ", isotropic, hyperparameters by log marginal likelihood (Nelder-Mead, 8 restarts)",
      "features: " + std::to_string(c.features) + " random Fourier features per sample",
      "gsobol: a_i = (i-1)/2, i = 1..5, on [0,1]^5",
      "rosenbrock: box [-2.048, 2.048]^2",
      "outputs: maximization form, standardized by the training data",
      "accept-ratio eta: eta_plus = eta_minus = eta * d (standard deviations)",
      "default looseness: eta_plus_sq = 0.02 d, eta_minus_sq = 0.5 d",
      "rmse: mean per-sample RMSE of the M' selected samples on a Halton test grid",
      "bes: information-gain form",
  };
}

inline std::filesystem::path output_dir(const ExperimentConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("BGP_OUT_DIR")) return env;
  return "results";
}

/// Writes `<kind><suffix>.csv` for every table plus a `<kind>.json` config sidecar.
inline std::vector<std::filesystem::path> write_experiment(const ExperimentConfig& c, const ExperimentOutput& o,
                                                           const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const auto header = header_block(c);
  for (const auto& [suffix, table] : o.tables) {
    const auto path = dir / (o.kind + suffix + ".csv");
    write_text(path, render_csv(table, header));
    written.push_back(path);
  }
  nlohmann::json side;
  side["config"] = to_json(c);
  side["config_hash"] = config_hash(c);
  side["code_version"] = kCodeVersion;
  side["design"] = header;
  const auto path = dir / (o.kind + ".json");
  write_text(path, side.dump(2) + "\n");
  written.push_back(path);
  return written;
}

}  // namespace bgp::harness
