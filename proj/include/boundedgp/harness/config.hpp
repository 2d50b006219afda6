#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../benchmarks.hpp"
#include "../bo.hpp"
#include "../errors.hpp"
#include "../kernel.hpp"

namespace bgp::harness {

#ifdef BOUNDEDGP_VERSION
inline constexpr const char* kCodeVersion = BOUNDEDGP_VERSION;
#else
inline constexpr const char* kCodeVersion = "0.1.0";
#endif

enum class ExperimentKind { accept_ratio, sampling_rmse, bo_regret, misspec_sweep, m_sweep };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::accept_ratio: return "accept-ratio";
    case ExperimentKind::sampling_rmse: return "sampling-rmse";
    case ExperimentKind::bo_regret: return "bo-regret";
    case ExperimentKind::misspec_sweep: return "misspec-sweep";
    case ExperimentKind::m_sweep: return "m-sweep";
  }
  return "unknown";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "accept-ratio") return ExperimentKind::accept_ratio;
  if (s == "sampling-rmse" || s == "sample-rmse") return ExperimentKind::sampling_rmse;
  if (s == "bo-regret" || s == "bo") return ExperimentKind::bo_regret;
  if (s == "misspec-sweep" || s == "misspec") return ExperimentKind::misspec_sweep;
  if (s == "m-sweep") return ExperimentKind::m_sweep;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

/// Every knob of one experiment. `eta` means:
///  accept-ratio: eta_plus = eta_minus = eta * d, as standard deviations;
///  misspec-sweep: misspecification magnitudes eta^2 (also the looseness variance);
///  sampling-rmse, m-sweep: unused (exact bounds with default looseness).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::accept_ratio;
  std::vector<std::string> functions;
  std::vector<int> n_train_per_dim{5};
  int samples = 200;
  int select = 100;
  int features = kDefaultFeatures;
  std::vector<double> eta;
  std::optional<double> eta_plus_sq;   // default looseness override; else 0.02 d
  std::optional<double> eta_minus_sq;  // else 0.5 d
  std::vector<std::string> acquisitions;
  std::vector<int> m_values;
  std::string sweep_target = "sampling";  // misspec-sweep: "sampling" or "bo"
  int iterations = -1;                    // BO: -1 means 10 d
  int repetitions = 30;
  std::uint64_t seed = 0;
  int test_points = 2048;
  int extrema_refine = 5;
  std::string kernel = "squared-exponential";
  bool optimize_hypers = true;
  bool record_timing = true;
  std::string out;  // output directory; empty means BGP_OUT_DIR or ./results

  static ExperimentConfig defaults(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
      case ExperimentKind::accept_ratio:
        c.functions = {"branin", "rosenbrock", "mccormick", "hartmann3", "alpine1", "gsobol"};
        c.eta = {0.5, 1.0};
        break;
      case ExperimentKind::sampling_rmse:
        c.functions = {"forrester", "branin"};
        c.n_train_per_dim = {3, 5, 10, 20};
        break;
      case ExperimentKind::bo_regret:
        c.functions = {"forrester", "branin"};
        c.acquisitions = {"bes", "bes-nw", "ts", "random"};
        c.repetitions = 20;
        c.extrema_refine = 3;
        break;
      case ExperimentKind::misspec_sweep:
        c.functions = {"forrester", "branin"};
        c.eta = {0.0, 1.0, 3.0, 5.0};
        break;
      case ExperimentKind::m_sweep:
        c.functions = {"forrester", "branin"};
        c.m_values = {20, 50, 200, 300, 500};
        break;
    }
    return c;
  }

  void validate() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (functions.empty()) throw ConfigError("function list is empty");
    for (const auto& f : functions) make_benchmark(f);
    if (n_train_per_dim.empty()) throw ConfigError("N_train schedule is empty");
    for (int n : n_train_per_dim) {
      if (n < 1) throw ConfigError("N_train multipliers must be >= 1");
    }
    if (features < 1) throw ConfigError("feature count must be >= 1");
    if (test_points < 1) throw ConfigError("test point count must be >= 1");
    kernel_family_from_string(kernel);
    const bool uses_samples = kind != ExperimentKind::bo_regret && kind != ExperimentKind::m_sweep;
    if (uses_samples && samples < 1) throw ConfigError("M must be >= 1 (empty run)");
    if (uses_samples && (select < 1 || select > samples)) throw ConfigError("M' must be in [1, M]");
    switch (kind) {
      case ExperimentKind::accept_ratio:
        if (eta.empty()) throw ConfigError("eta schedule is empty");
        for (double e : eta) {
          if (!(e > 0.0)) throw ConfigError("accept-ratio eta values must be positive");
        }
        break;
      case ExperimentKind::misspec_sweep:
        if (eta.empty()) throw ConfigError("eta schedule is empty");
        for (double e : eta) {
          if (!(e >= 0.0)) throw ConfigError("misspecification eta^2 values must be >= 0");
        }
        if (sweep_target != "sampling" && sweep_target != "bo") throw ConfigError("sweep target must be sampling or bo");
        if (sweep_target == "bo" && acquisitions.empty()) throw ConfigError("acquisition list is empty");
        break;
      case ExperimentKind::m_sweep:
        if (m_values.empty()) throw ConfigError("M schedule is empty");
        for (int m : m_values) {
          if (m < 2) throw ConfigError("M values must be >= 2");
        }
        break;
      case ExperimentKind::bo_regret:
        if (acquisitions.empty()) throw ConfigError("acquisition list is empty");
        for (const auto& a : acquisitions) acquisition_from_string(a);
        if (samples < 1) throw ConfigError("M must be >= 1");
        break;
      case ExperimentKind::sampling_rmse:
        break;
    }
    if (eta_plus_sq && !(*eta_plus_sq > 0.0)) throw ConfigError("eta_plus_sq must be positive");
    if (eta_minus_sq && !(*eta_minus_sq > 0.0)) throw ConfigError("eta_minus_sq must be positive");
  }

  Looseness looseness(int d) const {
    Looseness l = Looseness::defaults(d);
    if (eta_plus_sq) l.eta_plus_sq = *eta_plus_sq;
    if (eta_minus_sq) l.eta_minus_sq = *eta_minus_sq;
    return l;
  }
};

/// Deterministic JSON form; keys are sorted, output directory excluded.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["kind"] = to_string(c.kind);
  j["functions"] = c.functions;
  j["n_train_per_dim"] = c.n_train_per_dim;
  j["samples"] = c.samples;
  j["select"] = c.select;
  j["features"] = c.features;
  j["eta"] = c.eta;
  j["eta_plus_sq"] = c.eta_plus_sq ? nlohmann::json(*c.eta_plus_sq) : nlohmann::json(nullptr);
  j["eta_minus_sq"] = c.eta_minus_sq ? nlohmann::json(*c.eta_minus_sq) : nlohmann::json(nullptr);
  j["acquisitions"] = c.acquisitions;
  j["m_values"] = c.m_values;
  j["sweep_target"] = c.sweep_target;
  j["iterations"] = c.iterations;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["test_points"] = c.test_points;
  j["extrema_refine"] = c.extrema_refine;
  j["kernel"] = c.kernel;
  j["optimize_hypers"] = c.optimize_hypers;
  j["record_timing"] = c.record_timing;
  return j;
}

/// Overlays the keys present in `j` onto `base`.
inline ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base) {
  try {
    if (j.contains("kind")) {
      const auto kind = experiment_kind_from_string(j.at("kind").get<std::string>());
      if (kind != base.kind) base = ExperimentConfig::defaults(kind);
    }
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    opt("functions", base.functions);
    opt("n_train_per_dim", base.n_train_per_dim);
    opt("samples", base.samples);
    opt("select", base.select);
    opt("features", base.features);
    opt("eta", base.eta);
    if (j.contains("eta_plus_sq") && !j.at("eta_plus_sq").is_null()) base.eta_plus_sq = j.at("eta_plus_sq").get<double>();
    if (j.contains("eta_minus_sq") && !j.at("eta_minus_sq").is_null()) base.eta_minus_sq = j.at("eta_minus_sq").get<double>();
    opt("acquisitions", base.acquisitions);
    opt("m_values", base.m_values);
    opt("sweep_target", base.sweep_target);
    opt("iterations", base.iterations);
    opt("repetitions", base.repetitions);
    opt("seed", base.seed);
    opt("test_points", base.test_points);
    opt("extrema_refine", base.extrema_refine);
    opt("kernel", base.kernel);
    opt("optimize_hypers", base.optimize_hypers);
    opt("record_timing", base.record_timing);
    opt("out", base.out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j, std::move(base));
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

}  // namespace bgp::harness
