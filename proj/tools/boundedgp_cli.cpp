// Experiment runner: acceptance ratios, sampling RMSE, BO regret and sweeps.

#include <CLI11.hpp>
#include <boundedgp/harness/experiments.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace {

using bgp::harness::ExperimentConfig;
using bgp::harness::ExperimentKind;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> reps;
  std::vector<std::string> functions;
  std::optional<double> eta_plus_sq;
  std::optional<double> eta_minus_sq;
  std::optional<int> samples;
  std::optional<int> select;
  std::vector<std::string> acquisitions;
  std::vector<double> eta;
  std::vector<int> n_train;
  std::vector<int> m_values;
  std::optional<int> iterations;
  std::optional<int> refine;
  std::string target;
  bool no_timing = false;
  bool quiet = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  app->add_option("--seed", f.seed, "Base seed; repetition r uses seed + r");
  app->add_option("--out", f.out, "Output directory (default: $BGP_OUT_DIR or ./results)");
  app->add_option("--reps", f.reps, "Number of repetitions");
  app->add_option("--function", f.functions, "Benchmark name (repeatable or comma-separated)")->delimiter(',');
  app->add_option("--eta-plus-sq", f.eta_plus_sq, "Upper-bound looseness variance (default 0.02 d)");
  app->add_option("--eta-minus-sq", f.eta_minus_sq, "Lower-bound looseness variance (default 0.5 d)");
  app->add_option("--samples", f.samples, "Posterior samples M");
  app->add_option("--select", f.select, "Rank-selected samples M'");
  app->add_option("--n-train", f.n_train, "Training sizes as multiples of d")->delimiter(',');
  app->add_option("--refine", f.refine, "Descend only from the best k extremum starts (0 = all)");
  app->add_flag("--no-timing", f.no_timing, "Record zero wall time so outputs are byte-reproducible");
  app->add_flag("--quiet", f.quiet, "Do not print the summary table");
}

ExperimentConfig build_config(ExperimentKind kind, const CommonFlags& f) {
  ExperimentConfig c = ExperimentConfig::defaults(kind);
  if (!f.config.empty()) c = bgp::harness::load_config(f.config, c);
  if (c.kind != kind) throw bgp::ConfigError("config file kind does not match the subcommand");
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.reps) c.repetitions = *f.reps;
  if (!f.functions.empty()) c.functions = f.functions;
  if (f.eta_plus_sq) c.eta_plus_sq = f.eta_plus_sq;
  if (f.eta_minus_sq) c.eta_minus_sq = f.eta_minus_sq;
  if (f.samples) c.samples = *f.samples;
  if (f.select) c.select = *f.select;
  if (!f.acquisitions.empty()) c.acquisitions = f.acquisitions;
  if (!f.eta.empty()) c.eta = f.eta;
  if (!f.n_train.empty()) c.n_train_per_dim = f.n_train;
  if (!f.m_values.empty()) c.m_values = f.m_values;
  if (f.iterations) c.iterations = *f.iterations;
  if (f.refine) c.extrema_refine = *f.refine;
  if (!f.target.empty()) c.sweep_target = f.target;
  if (f.no_timing) c.record_timing = false;
  return c;
}

void emit(const ExperimentConfig& c, const bgp::harness::ExperimentOutput& o, bool quiet) {
  const auto files = bgp::harness::write_experiment(c, o, bgp::harness::output_dir(c));
  if (!quiet && !o.tables.empty()) std::cout << bgp::harness::render_csv(o.tables.front().second, {});
  for (const auto& p : files) std::cerr << "wrote " << p.string() << '\n';
}

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound-aware GP sampling and Bayesian optimization experiments"};
  app.require_subcommand(1);

  CommonFlags accept_flags, rmse_flags, bo_flags, sweep_flags;
  auto* accept = app.add_subcommand("accept-ratio", "Acceptance ratio of GP and SRGP samples under exact bounds");
  add_common(accept, accept_flags);
  accept->add_option("--eta", accept_flags.eta, "eta_plus = eta_minus = value * d")->delimiter(',');

  auto* rmse = app.add_subcommand("sample-rmse", "RMSE of rank-selected posterior samples vs the true function");
  add_common(rmse, rmse_flags);

  auto* bo = app.add_subcommand("bo", "Simple regret of BO runs");
  add_common(bo, bo_flags);
  bo->add_option("--acq", bo_flags.acquisitions, "bes, bes-nw, ei, ucb, ts, random (repeatable)")
      ->delimiter(',')
      ->check(CLI::IsMember({"bes", "bes-nw", "ei", "ucb", "ts", "random"}));
  bo->add_option("--iterations", bo_flags.iterations, "BO iterations (default 10 d)");

  std::string sweep_kind = "misspec";
  auto* sweep = app.add_subcommand("sweep", "Misspecification or sample-count sweeps");
  add_common(sweep, sweep_flags);
  sweep->add_option("--kind", sweep_kind, "misspec or m")->check(CLI::IsMember({"misspec", "m"}));
  sweep->add_option("--eta", sweep_flags.eta, "Misspecification magnitudes eta^2")->delimiter(',');
  sweep->add_option("--m", sweep_flags.m_values, "Sample counts M")->delimiter(',');
  sweep->add_option("--target", sweep_flags.target, "misspec target: sampling or bo")
      ->check(CLI::IsMember({"sampling", "bo"}));
  sweep->add_option("--acq", sweep_flags.acquisitions, "Acquisitions for --target bo")->delimiter(',');
  sweep->add_option("--iterations", sweep_flags.iterations, "BO iterations for --target bo");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage-error", e.what(), 2);
  }

  try {
    if (accept->parsed()) {
      const auto c = build_config(ExperimentKind::accept_ratio, accept_flags);
      emit(c, bgp::harness::run_accept_ratio(c).output, accept_flags.quiet);
    } else if (rmse->parsed()) {
      const auto c = build_config(ExperimentKind::sampling_rmse, rmse_flags);
      emit(c, bgp::harness::run_sampling_rmse(c).output, rmse_flags.quiet);
    } else if (bo->parsed()) {
      const auto c = build_config(ExperimentKind::bo_regret, bo_flags);
      emit(c, bgp::harness::run_bo_regret(c).output, bo_flags.quiet);
    } else if (sweep->parsed()) {
      if (sweep_kind == "m") {
        const auto c = build_config(ExperimentKind::m_sweep, sweep_flags);
        emit(c, bgp::harness::run_m_sweep(c).output, sweep_flags.quiet);
      } else {
        auto c = build_config(ExperimentKind::misspec_sweep, sweep_flags);
        if (c.sweep_target == "bo") {
          if (sweep_flags.eta.empty() && sweep_flags.config.empty()) c.eta = {0.0, 0.3, 0.5, 1.0};
          if (c.acquisitions.empty()) c.acquisitions = {"bes"};
          c.validate();
          auto res = bgp::harness::run_bo_experiment(c, c.eta);
          res.output.kind = "misspec-sweep-bo";
          emit(c, res.output, sweep_flags.quiet);
        } else {
          emit(c, bgp::harness::run_misspec_sampling(c).output, sweep_flags.quiet);
        }
      }
    }
  } catch (const bgp::Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal-error", e.what(), 1);
  }
  return 0;
}
