#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acquisition.hpp"
#include "benchmarks.hpp"
#include "bounds.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "gp.hpp"
#include "local_search.hpp"
#include "qmc.hpp"
#include "rff.hpp"
#include "srgp.hpp"

namespace bgp {

enum class Acquisition { bes, bes_nw, ei, ucb, ts, random };

inline std::string_view to_string(Acquisition a) {
  switch (a) {
    case Acquisition::bes: return "bes";
    case Acquisition::bes_nw: return "bes-nw";
    case Acquisition::ei: return "ei";
    case Acquisition::ucb: return "ucb";
    case Acquisition::ts: return "ts";
    case Acquisition::random: return "random";
  }
  return "unknown";
}

inline Acquisition acquisition_from_string(std::string_view s) {
  if (s == "bes") return Acquisition::bes;
  if (s == "bes-nw") return Acquisition::bes_nw;
  if (s == "ei") return Acquisition::ei;
  if (s == "ucb") return Acquisition::ucb;
  if (s == "ts") return Acquisition::ts;
  if (s == "random") return Acquisition::random;
  throw ConfigError("unknown acquisition '" + std::string(s) + "'");
}

struct SelectOptions {
  int candidates_per_dim = 512;
  int refine_top = 10;
  double fd_step = 1e-6;
  LocalSearchOptions search{50, 1e-6, 0.1, 1e-4, 30};
  BesOptions bes;
  double ei_xi = kDefaultEiXi;
  double ucb_delta = 0.1;
};

struct BoxMaximum {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
};

/// Maximizes f over [0,1]^d: scores a randomly shifted Halton candidate set,
/// then refines the best `refine_top` candidates by projected ascent with
/// central finite-difference gradients.
template <class F>
BoxMaximum maximize_on_box(F&& f, int d, Rng& rng, const SelectOptions& opts = {}) {
  const int n = std::max(1, opts.candidates_per_dim * d);
  const Eigen::MatrixXd C = shifted_halton_points(n, d, rng);
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = f(Eigen::VectorXd(C.row(i).transpose()));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int k = std::min(opts.refine_top, n);
  std::partial_sort(order.begin(), order.begin() + std::max(k, 1), order.end(), [&](int a, int b) {
    const double va = vals[static_cast<std::size_t>(a)], vb = vals[static_cast<std::size_t>(b)];
    return va > vb || (va == vb && a < b);
  });
  BoxMaximum best;
  best.x = C.row(order[0]).transpose();
  best.value = vals[static_cast<std::size_t>(order[0])];
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = finite_difference_gradient(f, x, opts.fd_step);
    return f(x);
  };
  for (int r = 0; r < k; ++r) {
    const Eigen::VectorXd x0 = C.row(order[static_cast<std::size_t>(r)]).transpose();
    const LocalSearchResult res = projected_ascent(objective, x0, opts.search);
    if (res.value > best.value) {
      best.value = res.value;
      best.x = res.x;
    }
  }
  return best;
}

struct Selection {
  Eigen::VectorXd x;
  double value = 0.0;
  bool fallback = false;     // entropy search replaced by EI
  std::string used;          // "bes", "ei-fallback", or the baseline name
  int accepted = 0;          // samples inside the two-sigma band
};

/// Chooses the next query. Entropy search falls back to EI when no sample
/// passes the two-sigma acceptance rule.
inline Selection select_next(const AcquisitionContext& ctx, Acquisition acq, Rng& rng,
                             const SelectOptions& opts = {}) {
  const int d = ctx.surrogate.dim();
  Selection sel;
  sel.accepted = ctx.bounds ? count_accepted(*ctx.bounds, ctx.summaries) : 0;
  auto run_ei = [&](std::string used) {
    const BoxMaximum m = maximize_on_box(
        [&](const Eigen::VectorXd& x) { return ei_acquisition(x, ctx.surrogate, ctx.best_y, opts.ei_xi); }, d, rng, opts);
    sel.x = m.x;
    sel.value = m.value;
    sel.used = std::move(used);
  };
  switch (acq) {
    case Acquisition::bes: {
      if (!ctx.bounds || sel.accepted == 0) {
        sel.fallback = true;
        run_ei("ei-fallback");
        return sel;
      }
      const BesEvaluator bes(ctx, opts.bes);
      const BoxMaximum m = maximize_on_box([&](const Eigen::VectorXd& x) { return bes.scaled(x); }, d, rng, opts);
      sel.x = m.x;
      sel.value = bes(m.x);
      sel.used = "bes";
      return sel;
    }
    case Acquisition::bes_nw: {
      BesOptions o = opts.bes;
      o.uniform_weights = true;
      const BesEvaluator bes(ctx, o);
      const BoxMaximum m = maximize_on_box([&](const Eigen::VectorXd& x) { return bes.scaled(x); }, d, rng, opts);
      sel.x = m.x;
      sel.value = bes(m.x);
      sel.used = "bes-nw";
      return sel;
    }
    case Acquisition::ei:
      run_ei("ei");
      return sel;
    case Acquisition::ucb: {
      const double beta = ucb_beta(d, ctx.iteration, opts.ucb_delta);
      const BoxMaximum m = maximize_on_box(
          [&](const Eigen::VectorXd& x) { return ucb_acquisition(x, ctx.surrogate, beta); }, d, rng, opts);
      sel.x = m.x;
      sel.value = m.value;
      sel.used = "ucb";
      return sel;
    }
    case Acquisition::ts: {
      if (ctx.summaries.empty()) throw InvalidArgument("Thompson sampling needs one sample");
      sel.x = ctx.summaries.front().x_max;
      sel.value = ctx.summaries.front().g_max;
      sel.used = "ts";
      return sel;
    }
    case Acquisition::random: {
      sel.x.resize(d);
      for (int i = 0; i < d; ++i) sel.x[i] = uniform01(rng);
      sel.used = "random";
      return sel;
    }
  }
  return sel;
}

struct BoConfig {
  std::string function = "forrester";
  Acquisition acquisition = Acquisition::bes;
  int iterations = -1;      // -1 means 10 d
  int initial_points = -1;  // -1 means d
  int samples = 200;
  int features = kDefaultFeatures;
  std::uint64_t seed = 0;
  double eta_sq = 0.0;      // misspecification magnitude; 0 means exact bounds
  bool use_upper = true;
  bool use_lower = true;
  bool use_srgp = true;     // entropy search on the square-root surrogate when f_plus is given
  KernelFamily kernel = KernelFamily::squared_exponential;
  double initial_lengthscale = 0.2;
  double initial_noise = 1e-4;
  bool optimize_hypers = true;
  bool record_timing = true;
  ExtremaOptions extrema{0, true, 3, {}};
  SelectOptions select;
};

struct BoRecord {
  int t = 0;                 // 0 for initial points
  Eigen::VectorXd x;         // unit-cube input
  double y = 0.0;            // maximization-form objective value
  std::string acquisition;   // "init", "bes", "ei-fallback", ...
  int accepted = 0;
  double regret = 0.0;       // f_max minus best observed value so far
  Eigen::VectorXd inferred_x;
  double inferred_regret = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct BoTrace {
  std::string function;
  std::string acquisition;
  std::uint64_t seed = 0;
  double f_max = 0.0;
  std::vector<BoRecord> records;
  bool failed = false;
  std::string error_kind;
  std::string error;

  double final_regret() const { return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.back().regret; }
  int fallback_count() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const BoRecord& r) { return r.acquisition == "ei-fallback"; }));
  }
};

namespace detail {

/// argmax of the surrogate mean over the unit cube.
inline Eigen::VectorXd inferred_argmax(const Surrogate& s, Rng& rng, const SelectOptions& base) {
  SelectOptions o = base;
  o.candidates_per_dim = std::max(64, base.candidates_per_dim / 4);
  o.refine_top = std::min(3, base.refine_top);
  return maximize_on_box([&](const Eigen::VectorXd& x) { return s.mean(x); }, s.dim(), rng, o).x;
}

}  // namespace detail

/// Sequential optimization of a benchmark in maximization form.
inline BoTrace run_bo(const BoConfig& cfg) {
  const BenchmarkFunction fn = make_benchmark(cfg.function);
  const int d = fn.d;
  const int T = cfg.iterations >= 0 ? cfg.iterations : 10 * d;
  const int n0 = cfg.initial_points >= 0 ? cfg.initial_points : d;
  if (n0 < 1) throw ConfigError("run_bo: at least one initial point is required");
  if (cfg.samples < 1 && (cfg.acquisition == Acquisition::bes || cfg.acquisition == Acquisition::bes_nw)) {
    throw ConfigError("run_bo: entropy search needs at least one sample");
  }

  BoTrace trace;
  trace.function = fn.name;
  trace.acquisition = std::string(to_string(cfg.acquisition));
  trace.seed = cfg.seed;
  trace.f_max = fn.f_max();

  Rng init_rng(mix_seed(cfg.seed, 1));
  Rng misspec_rng(mix_seed(cfg.seed, 2));
  const MisspecSigns signs = MisspecSigns::draw(misspec_rng);
  const Looseness looseness = Looseness::defaults(d);

  Eigen::MatrixXd X(n0 + T, d);
  Eigen::VectorXd Y(n0 + T);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = uniform01(init_rng);
    Y[i] = fn.evaluate(X.row(i).transpose());
    best = std::max(best, Y[i]);
    BoRecord r;
    r.x = X.row(i).transpose();
    r.y = Y[i];
    r.acquisition = "init";
    r.regret = trace.f_max - best;
    trace.records.push_back(std::move(r));
  }

  const KernelConfig kernel0 =
      KernelConfig::isotropic(d, cfg.initial_lengthscale, 1.0, cfg.initial_noise, cfg.kernel);
  for (int t = 1; t <= T; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const int n = n0 + t - 1;
    try {
      Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(t)));
      const Dataset ds = Dataset::from_unit(X.topRows(n), Y.head(n));
      FitOptions fit;
      fit.optimize_hypers = cfg.optimize_hypers;
      fit.seed = mix_seed(cfg.seed, 5000 + static_cast<std::uint64_t>(t));
      FittedGP gp = fit_gp(ds, kernel0, fit);

      std::optional<ApproxBounds> bounds;
      if (cfg.use_upper || cfg.use_lower) {
        const ApproxBounds full = misspecify(true_bounds(fn, ds.y_mean, ds.y_std), cfg.eta_sq, signs, looseness);
        ApproxBounds b = full;
        if (!cfg.use_upper) b.f_plus.reset();
        if (!cfg.use_lower) b.f_minus.reset();
        b.validate();
        bounds = b;
      }

      const double best_std = ds.y.maxCoeff();
      SamplingOptions sopts;
      sopts.features = cfg.features;
      sopts.extrema = cfg.extrema;

      std::optional<AcquisitionContext> ctx;
      switch (cfg.acquisition) {
        case Acquisition::bes: {
          if (cfg.use_srgp && bounds && bounds->f_plus) {
            const TransformSpec spec = sqrt_transform(*bounds);
            FitOptions hfit = fit;
            hfit.seed = mix_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(t));
            FittedGP gp_h = fit_latent_gp(ds, spec, kernel0, hfit);
            SampleBatch batch = draw_summarized(gp_h, cfg.samples, rng, spec, sopts);
            ctx.emplace(AcquisitionContext{Surrogate(std::move(gp_h), spec), std::move(batch.samples),
                                           std::move(batch.summaries), bounds, t, best_std});
          } else {
            SampleBatch batch = draw_summarized(gp, cfg.samples, rng, TransformSpec::identity(), sopts);
            ctx.emplace(AcquisitionContext{Surrogate(gp), std::move(batch.samples), std::move(batch.summaries),
                                           bounds, t, best_std});
          }
          if (ctx->bounds) assign_weights(*ctx->bounds, ctx->summaries);
          break;
        }
        case Acquisition::bes_nw: {
          SampleBatch batch = draw_summarized(gp, cfg.samples, rng, TransformSpec::identity(), sopts);
          ctx.emplace(AcquisitionContext{Surrogate(gp), std::move(batch.samples), std::move(batch.summaries),
                                         bounds, t, best_std});
          break;
        }
        case Acquisition::ts: {
          SampleBatch batch = draw_summarized(gp, 1, rng, TransformSpec::identity(), sopts);
          ctx.emplace(AcquisitionContext{Surrogate(gp), std::move(batch.samples), std::move(batch.summaries),
                                         bounds, t, best_std});
          break;
        }
        default:
          ctx.emplace(AcquisitionContext{Surrogate(gp), {}, {}, bounds, t, best_std});
      }

      const Selection sel = select_next(*ctx, cfg.acquisition, rng, cfg.select);
      X.row(n) = sel.x.transpose();
      Y[n] = fn.evaluate(sel.x);
      best = std::max(best, Y[n]);

      BoRecord r;
      r.t = t;
      r.x = sel.x;
      r.y = Y[n];
      r.acquisition = sel.used;
      r.accepted = sel.accepted;
      r.regret = trace.f_max - best;
      r.inferred_x = detail::inferred_argmax(ctx->surrogate, rng, cfg.select);
      r.inferred_regret = trace.f_max - fn.evaluate(r.inferred_x);
      if (cfg.record_timing) {
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      trace.records.push_back(std::move(r));
    } catch (const Error& e) {
      trace.failed = true;
      trace.error_kind = e.kind();
      trace.error = "iteration " + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return trace;
}

}  // namespace bgp
