#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace pagd {

// ----- Inverse-weighted allocation ----- //
//
//   minimize    sum_i a_i / w_i
//   subject to  sum_i w_i = budget,  w_i >= floor

struct AllocationProblem {
  std::vector<double> weights;  // a_i > 0
  double budget = 0.0;          // K
  double floor = 0.0;           // C_L >= 0
};

struct AllocationSolution {
  std::vector<double> w;  // in the caller's original order
  // 0-based position in the sorted order of the first coordinate above the
  // floor; equals n when every coordinate sits on the floor.
  std::size_t switch_index = 0;
  double objective = 0.0;
  double lambda = 0.0;  // budget multiplier
  // order[k] is the original index of the k-th smallest weight.
  std::vector<std::size_t> order;
};

enum class SwitchSearch { kLinear, kBinary };

/// Closed-form optimum with no floor: w_i proportional to sqrt(a_i).
AllocationSolution solve_unconstrained_allocation(
    const AllocationProblem& problem);

/// KKT solution with a per-coordinate floor. Weights need not be sorted; the
/// solver works on the sorted view and un-permutes the answer.
AllocationSolution solve_floored_allocation(
    const AllocationProblem& problem,
    SwitchSearch search = SwitchSearch::kLinear);

// ----- Power schedules ----- //

enum class SchedulePolicy { kConstant, kGeometric, kCtg };

std::string_view to_string(SchedulePolicy policy);
SchedulePolicy parse_schedule_policy(std::string_view name);

struct PowerSchedule {
  std::vector<double> sigma_sq;  // per-iteration transmit power
  std::size_t t_switch = 0;      // first iteration off the floor
  double avg_budget = 0.0;
  double floor = 0.0;
  double gamma = 0.0;  // sqrt(1 - mu*eta); 0 for constant schedules
  SchedulePolicy policy = SchedulePolicy::kConstant;
  // Set when the switch rule held for no t (rounding only); t_switch is then
  // forced to T-1.
  bool switch_rule_empty = false;

  std::size_t horizon() const { return sigma_sq.size(); }
  double total_power() const;
};

/// sqrt(1 - mu*eta), rejecting mu*eta outside (0, 1).
double contraction_factor(double mu, double eta);

/// Constant-then-geometric allocation: hold `floor` until the switch time,
/// then grow geometrically with ratio 1/gamma so that the schedule exactly
/// exhausts horizon * avg_budget.
///
/// Throws InfeasibleBudgetError when avg_budget < floor.
PowerSchedule ctg_schedule(std::size_t horizon, double avg_budget, double mu,
                           double eta, double floor);

PowerSchedule geometric_schedule(std::size_t horizon, double avg_budget,
                                 double mu, double eta);

PowerSchedule constant_schedule(std::size_t horizon, double avg_budget);

}  // namespace pagd
