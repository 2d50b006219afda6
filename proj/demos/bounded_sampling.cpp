// Draws GP and square-root GP posterior samples on Forrester data and
// compares how many of them respect the known optimum values.

#include <boundedgp/boundedgp.hpp>
#include <cstdio>

int main() {
  using namespace bgp;
  const BenchmarkFunction fn = make_benchmark("forrester");

  Rng rng(7);
  Eigen::MatrixXd X(6, 1);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = uniform01(rng);
    y[i] = fn.evaluate(X.row(i).transpose());
  }
  const Dataset ds = Dataset::from_unit(X, y);

  const StandardizedOptima truth = true_bounds(fn, ds.y_mean, ds.y_std);
  const ApproxBounds bounds = ApproxBounds::both(truth.f_max, 0.02, truth.f_min, 0.5);

  FitOptions fit;
  fit.optimize_hypers = true;
  const FittedGP gp = fit_gp(ds, KernelConfig::isotropic(1, 0.2), fit);
  SampleBatch gp_batch = draw_summarized(gp, 200, rng);
  const int gp_ok = count_accepted(bounds, gp_batch.summaries);

  Algorithm1Result srgp = run_algorithm1(ds, bounds, 200, rng);

  std::printf("f+ = %.3f, f- = %.3f (standardized)\n", truth.f_max, truth.f_min);
  std::printf("GP samples accepted:   %3d / 200\n", gp_ok);
  std::printf("SRGP samples accepted: %3d / 200\n", srgp.accepted);
  std::printf("\n   x    true     GP mean   SRGP aggregate\n");
  for (double x = 0.0; x <= 1.0001; x += 0.1) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, x);
    std::printf("%5.2f  %7.3f  %8.3f  %8.3f\n", x, ds.standardize(fn.evaluate(p)), gp.posterior(p).mean,
                srgp.aggregate(p));
  }
}
