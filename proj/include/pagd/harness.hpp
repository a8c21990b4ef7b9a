#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pagd/alloc.hpp"
#include "pagd/channel.hpp"
#include "pagd/descent.hpp"
#include "pagd/lqr.hpp"
#include "pagd/replicate.hpp"

namespace pagd {

std::string_view library_version();

enum class ExperimentMode { kSyntheticGlobal, kSyntheticLocal, kLqr };

std::string_view to_string(ExperimentMode mode);
ExperimentMode parse_experiment_mode(std::string_view name);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kSyntheticGlobal;
  std::size_t horizon = 100;
  double eta = 0.25;          // <= 0 picks 0.9 of the tightest allowed step
  double avg_budget = 1.0;
  double budget_ratio = 0.0;  // > 0 sets avg_budget = ratio * power floor
  double noise_power = 0.1;
  double noise_bound = 1.0;
  NoiseModel noise_model = NoiseModel::kTwoPointRadius;
  SchedulePolicy schedule = SchedulePolicy::kGeometric;
  std::vector<SchedulePolicy> policies;  // compare; empty uses mode defaults
  std::size_t seeds = 2000;
  std::uint64_t root_seed = 1;
  // synthetic objectives
  std::size_t dim = 10;
  double mu = 1.0;
  double L = 2.0;
  double x0_scale = 1.0;
  double start_fraction = 0.45;  // f(x0) = fraction * v in local modes
  double level = 20.0;
  double radius = 1.0;
  // lqr
  std::string instance;
  double cap_margin = 0.1;
  lqr::ConstantsMode constants = lqr::ConstantsMode::kLemma;
  // compare
  std::vector<std::size_t> sweep_horizons;
  std::string output = "pagd-out";

  nlohmann::json to_json() const;
  /// Overrides the fields present in `doc`; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& doc,
                                    ExperimentConfig base);
  static ExperimentConfig from_json(const nlohmann::json& doc);
};

struct PolicyOutcome {
  SchedulePolicy policy = SchedulePolicy::kConstant;
  PowerSchedule schedule;
  std::vector<double> final_z;  // per seed, in seed-index order
  Summary stats;
  double noiseless_z = 0.0;
  std::string bound_name;
  double bound = 0.0;
  double bound_loose = 0.0;  // geometric only; NaN otherwise
  double bound_ratio = 0.0;  // stats.mean / bound
  std::size_t paths_sublevel_violation = 0;
  std::size_t paths_radius_violation = 0;
  std::size_t aborted_paths = 0;
  RunTrace sample_trace;  // seed index 0
};

struct PairedDifference {
  SchedulePolicy policy = SchedulePolicy::kConstant;
  SchedulePolicy baseline = SchedulePolicy::kConstant;
  std::vector<double> diff;  // policy - baseline, per seed
  Summary stats;
};

struct SweepPoint {
  std::size_t horizon = 0;
  SchedulePolicy policy = SchedulePolicy::kConstant;
  Summary stats;
  double noiseless_z = 0.0;
  double noise_component = 0.0;  // stats.mean - noiseless_z
  double bound = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  double eta = 0.0;
  double avg_budget = 0.0;
  double power_floor = 0.0;
  double z0 = 0.0;
  ProblemConstants constants;
  std::vector<PolicyOutcome> outcomes;
  std::vector<PairedDifference> paired;
  std::vector<SweepPoint> sweep;
  std::vector<std::pair<SchedulePolicy, double>> slopes;  // log-log vs T

  const PolicyOutcome& outcome(SchedulePolicy policy) const;
};

/// One schedule policy (config.schedule), replicated over config.seeds.
/// Validates every precondition before running; throws InvalidInputError
/// (bad config or step size) or InfeasibleBudgetError.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// All configured policies on common random numbers, paired differences
/// against the first policy, and an optional horizon sweep.
ExperimentReport compare_schedules(const ExperimentConfig& config);

/// Writes manifest.json plus CSV tables into `dir`; returns the file names.
std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::filesystem::path& dir);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace pagd
