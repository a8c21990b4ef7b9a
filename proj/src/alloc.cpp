#include "pagd/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "pagd/errors.hpp"

namespace pagd {
namespace {

void check_weights(const std::vector<double>& weights) {
  if (weights.empty()) {
    throw InvalidInputError("allocation needs at least one weight");
  }
  for (double a : weights) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InvalidInputError("allocation weights must be positive and finite");
    }
  }
}

// sqrt(a_i / lambda(j)) >= floor, written without the division:
//   sqrt(a_j) * (K - j*C_L) >= C_L * sum_{i>=j} sqrt(a_i)
// with j 0-based. `tail` is the suffix sum of square roots.
bool above_floor(const std::vector<double>& root, const std::vector<double>& tail,
                 double budget, double floor, std::size_t j) {
  const double residual = budget - static_cast<double>(j) * floor;
  return root[j] * residual >= floor * tail[j];
}

}  // namespace

AllocationSolution solve_unconstrained_allocation(
    const AllocationProblem& problem) {
  check_weights(problem.weights);
  if (!(problem.budget > 0.0)) {
    throw InvalidInputError("allocation budget must be positive");
  }
  const std::size_t n = problem.weights.size();
  AllocationSolution sol;
  sol.w.resize(n);
  sol.order.resize(n);
  std::iota(sol.order.begin(), sol.order.end(), std::size_t{0});

  double root_sum = 0.0;
  for (double a : problem.weights) root_sum += std::sqrt(a);
  for (std::size_t i = 0; i < n; ++i) {
    sol.w[i] = problem.budget * std::sqrt(problem.weights[i]) / root_sum;
  }
  sol.switch_index = 0;
  sol.objective = root_sum * root_sum / problem.budget;
  sol.lambda = (root_sum / problem.budget) * (root_sum / problem.budget);
  return sol;
}

AllocationSolution solve_floored_allocation(const AllocationProblem& problem,
                                            SwitchSearch search) {
  check_weights(problem.weights);
  if (!(problem.budget > 0.0)) {
    throw InvalidInputError("allocation budget must be positive");
  }
  if (!(problem.floor >= 0.0)) {
    throw InvalidInputError("allocation floor must be nonnegative");
  }
  const std::size_t n = problem.weights.size();
  if (static_cast<double>(n) * problem.floor > problem.budget) {
    std::ostringstream os;
    os << "Insufficient budget for power allocation: n*floor = "
       << static_cast<double>(n) * problem.floor << " exceeds budget "
       << problem.budget;
    throw InfeasibleBudgetError(os.str());
  }

  AllocationSolution sol;
  sol.order.resize(n);
  std::iota(sol.order.begin(), sol.order.end(), std::size_t{0});
  std::stable_sort(sol.order.begin(), sol.order.end(),
                   [&](std::size_t l, std::size_t r) {
                     return problem.weights[l] < problem.weights[r];
                   });

  std::vector<double> root(n);
  for (std::size_t k = 0; k < n; ++k) {
    root[k] = std::sqrt(problem.weights[sol.order[k]]);
  }
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + root[k];

  // The predicate is monotone in j for sorted weights, and always true at
  // j = n-1 when the budget is feasible.
  std::size_t s = n;
  if (search == SwitchSearch::kLinear) {
    for (std::size_t j = 0; j < n; ++j) {
      if (above_floor(root, tail, problem.budget, problem.floor, j)) {
        s = j;
        break;
      }
    }
  } else {
    std::size_t lo = 0;
    std::size_t hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (above_floor(root, tail, problem.budget, problem.floor, mid)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    s = lo;
  }

  sol.switch_index = s;
  sol.w.assign(n, problem.floor);
  double objective = 0.0;
  for (std::size_t k = 0; k < s; ++k) {
    objective += root[k] * root[k] / problem.floor;
  }
  if (s < n) {
    const double residual = problem.budget - static_cast<double>(s) * problem.floor;
    const double scale = residual / tail[s];  // 1/sqrt(lambda)
    for (std::size_t k = s; k < n; ++k) {
      sol.w[sol.order[k]] = root[k] * scale;
    }
    sol.lambda = 1.0 / (scale * scale);
    objective += tail[s] * tail[s] / residual;
  }
  sol.objective = objective;
  return sol;
}

std::string_view to_string(SchedulePolicy policy) {
  switch (policy) {
    case SchedulePolicy::kConstant:
      return "constant";
    case SchedulePolicy::kGeometric:
      return "geometric";
    case SchedulePolicy::kCtg:
      return "ctg";
  }
  return "unknown";
}

SchedulePolicy parse_schedule_policy(std::string_view name) {
  if (name == "constant") return SchedulePolicy::kConstant;
  if (name == "geometric") return SchedulePolicy::kGeometric;
  if (name == "ctg") return SchedulePolicy::kCtg;
  throw InvalidInputError("unknown schedule policy '" + std::string(name) +
                          "' (expected constant, geometric or ctg)");
}

double PowerSchedule::total_power() const {
  return std::accumulate(sigma_sq.begin(), sigma_sq.end(), 0.0);
}

double contraction_factor(double mu, double eta) {
  if (!(eta > 0.0) || !(mu > 0.0)) {
    throw InvalidInputError("step size and PL constant must be positive");
  }
  const double mu_eta = mu * eta;
  if (!(mu_eta < 1.0)) {
    throw InvalidInputError("mu*eta must lie in (0, 1)");
  }
  return std::sqrt(1.0 - mu_eta);
}

PowerSchedule ctg_schedule(std::size_t horizon, double avg_budget, double mu,
                           double eta, double floor) {
  const double gamma = contraction_factor(mu, eta);
  if (!(avg_budget > 0.0) || !std::isfinite(avg_budget)) {
    throw InvalidInputError("average power budget must be positive");
  }
  if (!(floor >= 0.0)) {
    throw InvalidInputError("power floor must be nonnegative");
  }
  if (avg_budget < floor) {
    std::ostringstream os;
    os << "Insufficient budget for power allocation: average budget "
       << avg_budget << " is below the power floor " << floor;
    throw InfeasibleBudgetError(os.str());
  }

  PowerSchedule sched;
  sched.avg_budget = avg_budget;
  sched.floor = floor;
  sched.gamma = gamma;
  sched.policy = SchedulePolicy::kCtg;
  if (horizon == 0) return sched;

  const std::size_t T = horizon;
  // powers[k] = gamma^k, partial[m] = sum_{k<m} gamma^k
  std::vector<double> powers(T + 1);
  std::vector<double> partial(T + 1);
  powers[0] = 1.0;
  partial[0] = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    powers[k + 1] = powers[k] * gamma;
    partial[k + 1] = partial[k] + powers[k];
  }

  // T*avg - t*floor, arranged so the equal-budget case is exact.
  auto residual = [&](std::size_t t) {
    return static_cast<double>(T) * (avg_budget - floor) +
           static_cast<double>(T - t) * floor;
  };

  std::size_t ts = T;
  for (std::size_t t = 0; t < T; ++t) {
    if (powers[T - 1 - t] * residual(t) >= partial[T - t] * floor) {
      ts = t;
      break;
    }
  }
  if (ts == T) {
    ts = T - 1;
    sched.switch_rule_empty = true;
  }

  sched.t_switch = ts;
  sched.sigma_sq.assign(T, floor);
  const double scale = residual(ts) / partial[T - ts];
  for (std::size_t t = ts; t < T; ++t) {
    sched.sigma_sq[t] = powers[T - 1 - t] * scale;
  }
  return sched;
}

PowerSchedule geometric_schedule(std::size_t horizon, double avg_budget,
                                 double mu, double eta) {
  PowerSchedule sched = ctg_schedule(horizon, avg_budget, mu, eta, 0.0);
  sched.policy = SchedulePolicy::kGeometric;
  return sched;
}

PowerSchedule constant_schedule(std::size_t horizon, double avg_budget) {
  if (!(avg_budget > 0.0) || !std::isfinite(avg_budget)) {
    throw InvalidInputError("average power budget must be positive");
  }
  PowerSchedule sched;
  sched.sigma_sq.assign(horizon, avg_budget);
  sched.t_switch = horizon;
  sched.avg_budget = avg_budget;
  sched.floor = avg_budget;
  sched.gamma = 0.0;
  sched.policy = SchedulePolicy::kConstant;
  return sched;
}

}  // namespace pagd
