#include <gtest/gtest.h>

#include <boundedgp/harness/experiments.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace {

using namespace bgp;
using namespace bgp::harness;

ExperimentConfig tiny(ExperimentKind kind) {
  ExperimentConfig c = ExperimentConfig::defaults(kind);
  c.functions = {"forrester"};
  c.n_train_per_dim = {5};
  c.samples = 20;
  c.select = 10;
  c.repetitions = 3;
  c.test_points = 128;
  c.optimize_hypers = false;
  c.record_timing = false;
  c.seed = 42;
  return c;
}

std::string csv_bytes(const ExperimentConfig& c, const ExperimentOutput& o) {
  std::string all;
  for (const auto& [suffix, table] : o.tables) all += render_csv(table, header_block(c));
  return all;
}

TEST(Harness, SamplingRunsAreByteReproducible) {
  const ExperimentConfig c = tiny(ExperimentKind::sampling_rmse);
  EXPECT_EQ(csv_bytes(c, run_sampling_rmse(c).output), csv_bytes(c, run_sampling_rmse(c).output));
}

TEST(Harness, ResultsDoNotDependOnWorkerCount) {
  const ExperimentConfig c = tiny(ExperimentKind::accept_ratio);
  setenv("BGP_WORKERS", "1", 1);
  const std::string one = csv_bytes(c, run_accept_ratio(c).output);
  setenv("BGP_WORKERS", "3", 1);
  const std::string three = csv_bytes(c, run_accept_ratio(c).output);
  unsetenv("BGP_WORKERS");
  EXPECT_EQ(one, three);
}

TEST(Harness, BoRunsAreByteReproducibleWithoutTiming) {
  ExperimentConfig c = tiny(ExperimentKind::bo_regret);
  c.acquisitions = {"bes", "random"};
  c.iterations = 3;
  c.repetitions = 2;
  EXPECT_EQ(csv_bytes(c, run_bo_regret(c).output), csv_bytes(c, run_bo_regret(c).output));
}

TEST(Harness, RepetitionSeedsOffsetTheBase) {
  const ExperimentConfig c = tiny(ExperimentKind::accept_ratio);
  const AcceptRatioResult r = run_accept_ratio(c);
  for (const auto& run : r.runs) EXPECT_EQ(run.seed, c.seed + static_cast<std::uint64_t>(run.rep));
}

TEST(Harness, ValidationRejectsEmptyAndInconsistentRuns) {
  ExperimentConfig c = tiny(ExperimentKind::accept_ratio);
  c.samples = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::accept_ratio);
  c.select = c.samples + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::accept_ratio);
  c.repetitions = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::accept_ratio);
  c.eta.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::accept_ratio);
  c.functions.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::accept_ratio);
  c.functions = {"nope"};
  EXPECT_THROW(c.validate(), UnknownBenchmark);
  c = tiny(ExperimentKind::m_sweep);
  c.m_values = {1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(ExperimentKind::bo_regret);
  c.acquisitions = {"pi"};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(experiment_kind_from_string("fig9"), ConfigError);
}

TEST(Harness, ExactBoundRowOfMisspecSweepMatchesSamplingRun) {
  ExperimentConfig s = tiny(ExperimentKind::sampling_rmse);
  ExperimentConfig m = tiny(ExperimentKind::misspec_sweep);
  m.eta = {0.0, 1.0};
  const std::vector<Variant> variants{Variant::gp, Variant::wgp_both, Variant::wsrgp_both};
  const SamplingResult a = run_sampling_rmse(s, variants);
  const SamplingResult b = run_misspec_sampling(m, variants);
  int matched = 0;
  for (const auto& ra : a.rows) {
    for (const auto& rb : b.rows) {
      if (rb.eta_sq == 0.0 && rb.rep == ra.rep && rb.variant == ra.variant) {
        EXPECT_EQ(ra.rmse, rb.rmse) << to_string(ra.variant);
        EXPECT_EQ(ra.accepted, rb.accepted);
        ++matched;
      }
    }
  }
  EXPECT_EQ(matched, 9);
}

TEST(Harness, MSweepReusesLeadingSamples) {
  ExperimentConfig c = tiny(ExperimentKind::m_sweep);
  c.m_values = {4, 20};
  c.repetitions = 1;
  const SamplingResult r = run_m_sweep(c);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) EXPECT_EQ(row.status, "ok");
}

TEST(Harness, JsonRoundTripPreservesHash) {
  ExperimentConfig c = tiny(ExperimentKind::misspec_sweep);
  c.eta_plus_sq = 0.3;
  c.acquisitions = {"bes"};
  const ExperimentConfig back = from_json(to_json(c), ExperimentConfig::defaults(ExperimentKind::accept_ratio));
  EXPECT_EQ(back.kind, c.kind);
  EXPECT_EQ(config_hash(back), config_hash(c));
  ASSERT_TRUE(back.eta_plus_sq.has_value());
  EXPECT_EQ(*back.eta_plus_sq, 0.3);
  EXPECT_FALSE(back.eta_minus_sq.has_value());
}

TEST(Harness, HashTracksSettingsButNotOutputPath) {
  ExperimentConfig c = tiny(ExperimentKind::accept_ratio);
  const std::string h = config_hash(c);
  EXPECT_EQ(h.size(), 16u);
  c.out = "/tmp/elsewhere";
  EXPECT_EQ(config_hash(c), h);
  c.seed += 1;
  EXPECT_NE(config_hash(c), h);
}

TEST(Harness, BadConfigValuesBecomeConfigErrors) {
  EXPECT_THROW(from_json(nlohmann::json{{"samples", "many"}}, tiny(ExperimentKind::accept_ratio)), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json", tiny(ExperimentKind::accept_ratio)), ConfigError);
}

TEST(Harness, OutputFilesCarryHeaderAndHash) {
  const ExperimentConfig c = tiny(ExperimentKind::accept_ratio);
  const auto dir = std::filesystem::temp_directory_path() / "boundedgp_harness_test";
  std::filesystem::remove_all(dir);
  const auto files = write_experiment(c, run_accept_ratio(c).output, dir);
  ASSERT_EQ(files.size(), 3u);
  std::ifstream in(files.front());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string hash = config_hash(c);
  EXPECT_EQ(text.rfind("# boundedgp " + std::string(kCodeVersion), 0), 0u);
  EXPECT_NE(text.find("# config_hash: " + hash), std::string::npos);
  EXPECT_NE(text.find("gsobol: a_i = (i-1)/2"), std::string::npos);
  std::istringstream lines(text);
  std::string line;
  int data_rows = 0;
  bool header_seen = false;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++data_rows;
    EXPECT_NE(line.find(hash), std::string::npos);
  }
  EXPECT_EQ(data_rows, 4);
  std::ifstream side(files.back());
  const nlohmann::json j = nlohmann::json::parse(side);
  EXPECT_EQ(j.at("config_hash"), hash);
  std::filesystem::remove_all(dir);
}

TEST(Harness, SummaryStatisticsUseSampleStd) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean_of(v), 2.5);
  EXPECT_NEAR(sample_std(v), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(median_of(v), 2.5);
}

TEST(Harness, CsvRowWidthIsChecked) {
  CsvTable t;
  t.columns = {"a", "b"};
  t.add(1, 2.5);
  EXPECT_THROW(t.add(1), Error);
  EXPECT_EQ(render_csv(t, {"h"}), "# h\na,b\n1,2.5\n");
}

}  // namespace
