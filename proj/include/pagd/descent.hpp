#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pagd/alloc.hpp"
#include "pagd/channel.hpp"

namespace pagd {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Regularity constants of an objective. D and v stay infinite for objectives
/// that are smooth and PL on the whole space.
struct ProblemConstants {
  double mu = 0.0;         // PL constant
  double L = 0.0;          // (local) smoothness constant
  double G = 0.0;          // gradient bound
  double D = kUnbounded;   // local smoothness radius
  double v = kUnbounded;   // sublevel value of the feasible set

  bool local() const { return v < kUnbounded; }
  void validate() const;
};

struct ObjectiveOracle {
  std::function<double(const Eigen::VectorXd&)> eval;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  double f_star = 0.0;
  ProblemConstants constants;
  std::size_t dim = 0;
};

struct RunTrace {
  std::vector<Eigen::VectorXd> iterates;  // empty when horizon > kMaxStoredIterates
  std::vector<double> z;                   // f(x_t) - f*, length T+1
  std::vector<double> grad_norm;           // ||grad f(x_t)||, length T+1
  std::vector<double> sigma_sq;            // length T
  std::vector<double> step_norm;           // ||x_{t+1} - x_t||, length T
  std::vector<std::uint64_t> noise_seeds;  // length T
  // 1 when x_t lies in the sublevel set and the step into x_t was within D.
  std::vector<std::uint8_t> contained;     // length T+1
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::size_t t_switch = 0;
  double gamma = 0.0;
  SchedulePolicy policy = SchedulePolicy::kConstant;
  std::size_t sublevel_violations = 0;
  std::size_t radius_violations = 0;
  bool aborted = false;
  std::string abort_reason;

  static constexpr std::size_t kMaxStoredIterates = 10000;

  std::size_t steps() const { return sigma_sq.size(); }
  double final_suboptimality() const { return z.back(); }
};

/// Power-allocated gradient descent:
///   x_{t+1} = x_t - eta * dec(enc(grad f(x_t)) + n_t)
/// with n_t drawn from the channel under derive_seed(seed, t).
///
/// For local oracles, f(x0) <= v/2 is required; leaving the sublevel set or
/// stepping farther than D is recorded in the trace, not thrown. An objective
/// that throws InstabilityError mid-run aborts the run with a partial trace.
RunTrace run_pagd(const ObjectiveOracle& oracle, const PowerSchedule& schedule,
                  const ChannelSpec& channel, const Eigen::VectorXd& x0,
                  double eta, std::uint64_t seed);

/// Uniform-power baseline; eta must lie in (0, 1/L).
RunTrace run_constant_power(const ObjectiveOracle& oracle, double avg_budget,
                            const ChannelSpec& channel,
                            const Eigen::VectorXd& x0, double eta,
                            std::size_t horizon, std::uint64_t seed);

// ----- Closed-form last-iterate bounds ----- //

/// Uniform power, eta in (0, 1/L):
///   (1 - mu eta)^T z0 + (L G^2 eta / mu) (sigma_N^2 / avg_budget)
double constant_power_bound(const ProblemConstants& c, double eta,
                            std::size_t horizon, double avg_budget,
                            double noise_power, double z0);

struct GeometricBound {
  double loose = 0.0;
  double tight = 0.0;
};

/// Geometric allocation, eta in (0, 1/(2L)].
GeometricBound geometric_bound(const ProblemConstants& c, double eta,
                               std::size_t horizon, double avg_budget,
                               double noise_power, double z0);

/// Constant-then-geometric allocation under local conditions,
/// eta < min(D/G, 1/(4L)). The schedule must carry geometric or CtG metadata.
double ctg_bound(const ProblemConstants& c, double eta, std::size_t horizon,
                 double avg_budget, double noise_power,
                 const PowerSchedule& schedule, double z0);

/// Power floor that keeps every path in the sublevel set and every step
/// within D:  G^2 Delta^2 max(eta^2 / (D - G eta)^2, 2 / (mu v)).
double local_power_floor(const ProblemConstants& c, double eta,
                         double noise_bound);

// Step-size ranges of the three bounds; each throws InvalidInputError naming
// the violated condition.
void check_constant_power_step(const ProblemConstants& c, double eta);
void check_geometric_step(const ProblemConstants& c, double eta);
void check_local_step(const ProblemConstants& c, double eta);

/// Columns: t, z_t, sigma_sq_t, grad_norm, containment_flag. sigma_sq_t is
/// empty on the final row.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

}  // namespace pagd
