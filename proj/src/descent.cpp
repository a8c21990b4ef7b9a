#include "pagd/descent.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "format.hpp"
#include "pagd/errors.hpp"

namespace pagd {
namespace {

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || std::isnan(value)) {
    throw InvalidInputError(std::string(what) + " must be positive");
  }
}

void check_bound_inputs(std::size_t /*horizon*/, double avg_budget,
                        double noise_power, double z0) {
  check_positive(avg_budget, "average power budget");
  if (!(noise_power >= 0.0)) {
    throw InvalidInputError("noise power must be nonnegative");
  }
  if (!(z0 >= 0.0)) {
    throw InvalidInputError("initial suboptimality must be nonnegative");
  }
}

std::string describe_range(const char* bound, double eta, const char* rule,
                           double limit) {
  std::ostringstream os;
  os << bound << " requires step size eta " << rule << ' ' << limit
     << ", got eta = " << eta;
  return os.str();
}

}  // namespace

void ProblemConstants::validate() const {
  check_positive(mu, "PL constant mu");
  check_positive(L, "smoothness constant L");
  check_positive(G, "gradient bound G");
  check_positive(D, "smoothness radius D");
  check_positive(v, "sublevel value v");
  if (mu > L) {
    std::ostringstream os;
    os << "PL constant mu = " << mu << " exceeds smoothness constant L = " << L;
    throw InvalidInputError(os.str());
  }
}

void check_constant_power_step(const ProblemConstants& c, double eta) {
  c.validate();
  if (!(eta > 0.0 && eta < 1.0 / c.L)) {
    throw InvalidInputError(describe_range(
        "constant-power bound", eta, "in (0, 1/L), 1/L =", 1.0 / c.L));
  }
}

void check_geometric_step(const ProblemConstants& c, double eta) {
  c.validate();
  if (!(eta > 0.0 && eta <= 0.5 / c.L)) {
    throw InvalidInputError(describe_range(
        "geometric-allocation bound", eta, "in (0, 1/(2L)], 1/(2L) =",
        0.5 / c.L));
  }
}

void check_local_step(const ProblemConstants& c, double eta) {
  c.validate();
  const double limit = std::min(c.D / c.G, 0.25 / c.L);
  if (!(eta > 0.0 && eta < limit)) {
    throw InvalidInputError(describe_range(
        "local-conditions (constant-then-geometric) bound", eta,
        "in (0, min(D/G, 1/(4L))), limit =", limit));
  }
}

RunTrace run_pagd(const ObjectiveOracle& oracle, const PowerSchedule& schedule,
                  const ChannelSpec& channel, const Eigen::VectorXd& x0,
                  double eta, std::uint64_t seed) {
  channel.validate();
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidInputError("step size must be positive and finite");
  }
  if (!oracle.eval || !oracle.grad) {
    throw InvalidInputError("objective oracle is missing eval or grad");
  }
  const auto dim = static_cast<std::size_t>(x0.size());
  if (channel.dim != dim || (oracle.dim != 0 && oracle.dim != dim)) {
    std::ostringstream os;
    os << "dimension mismatch: x0 has " << dim << " entries, channel carries "
       << channel.dim << ", oracle expects " << oracle.dim;
    throw InvalidInputError(os.str());
  }

  const ProblemConstants& k = oracle.constants;
  const bool local = k.local();
  double fx = oracle.eval(x0);
  if (local && fx > 0.5 * k.v) {
    std::ostringstream os;
    os << "local-conditions run needs f(x0) <= v/2: f(x0) = " << fx
       << ", v/2 = " << 0.5 * k.v;
    throw InvalidInputError(os.str());
  }

  const NoiseGenerator noise(channel);
  const std::size_t horizon = schedule.horizon();
  const bool store = horizon <= RunTrace::kMaxStoredIterates;

  RunTrace trace;
  trace.eta = eta;
  trace.seed = seed;
  trace.t_switch = schedule.t_switch;
  trace.gamma = schedule.gamma;
  trace.policy = schedule.policy;
  trace.z.reserve(horizon + 1);
  trace.grad_norm.reserve(horizon + 1);
  trace.contained.reserve(horizon + 1);
  if (store) trace.iterates.reserve(horizon + 1);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd g = oracle.grad(x);
  trace.z.push_back(fx - oracle.f_star);
  trace.grad_norm.push_back(g.norm());
  trace.contained.push_back(!local || fx <= k.v);
  if (store) trace.iterates.push_back(x);

  for (std::size_t t = 0; t < horizon; ++t) {
    const double power = schedule.sigma_sq[t];
    const std::uint64_t noise_seed = derive_seed(seed, t);
    const Transmission tx = send(g, power, noise, noise_seed);
    const Eigen::VectorXd step = eta * decode(tx.received, power, channel);
    Eigen::VectorXd next = x - step;

    try {
      fx = oracle.eval(next);
      g = oracle.grad(next);
    } catch (const InstabilityError& e) {
      trace.aborted = true;
      trace.abort_reason = e.what();
      break;
    }

    const double step_norm = step.norm();
    const bool in_level = !local || fx <= k.v;
    const bool within = step_norm <= k.D;
    if (!in_level) ++trace.sublevel_violations;
    if (!within) ++trace.radius_violations;

    x = std::move(next);
    trace.sigma_sq.push_back(power);
    trace.noise_seeds.push_back(noise_seed);
    trace.step_norm.push_back(step_norm);
    trace.z.push_back(fx - oracle.f_star);
    trace.grad_norm.push_back(g.norm());
    trace.contained.push_back(in_level && within);
    if (store) trace.iterates.push_back(x);
  }
  return trace;
}

RunTrace run_constant_power(const ObjectiveOracle& oracle, double avg_budget,
                            const ChannelSpec& channel,
                            const Eigen::VectorXd& x0, double eta,
                            std::size_t horizon, std::uint64_t seed) {
  check_constant_power_step(oracle.constants, eta);
  return run_pagd(oracle, constant_schedule(horizon, avg_budget), channel, x0,
                  eta, seed);
}

double constant_power_bound(const ProblemConstants& c, double eta,
                            std::size_t horizon, double avg_budget,
                            double noise_power, double z0) {
  check_constant_power_step(c, eta);
  check_bound_inputs(horizon, avg_budget, noise_power, z0);
  const double decay = std::pow(1.0 - c.mu * eta, static_cast<double>(horizon));
  return decay * z0 +
         (c.L * c.G * c.G * eta / c.mu) * (noise_power / avg_budget);
}

GeometricBound geometric_bound(const ProblemConstants& c, double eta,
                               std::size_t horizon, double avg_budget,
                               double noise_power, double z0) {
  check_geometric_step(c, eta);
  check_bound_inputs(horizon, avg_budget, noise_power, z0);
  const double decay = std::pow(1.0 - c.mu * eta, static_cast<double>(horizon));
  GeometricBound out{decay * z0, decay * z0};
  if (horizon == 0) return out;

  const double gamma = std::sqrt(1.0 - c.mu * eta);
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    sum += power;
    power *= gamma;
  }
  const double T = static_cast<double>(horizon);
  const double snr_inv = noise_power / avg_budget;
  out.tight += (sum * sum / T) * c.L * c.G * c.G * eta * eta * snr_inv;
  out.loose += (4.0 / T) * (c.L * c.G * c.G / (c.mu * c.mu)) * snr_inv;
  return out;
}

double ctg_bound(const ProblemConstants& c, double eta, std::size_t horizon,
                 double avg_budget, double noise_power,
                 const PowerSchedule& schedule, double z0) {
  check_local_step(c, eta);
  check_bound_inputs(horizon, avg_budget, noise_power, z0);
  if (schedule.policy == SchedulePolicy::kConstant) {
    throw InvalidInputError(
        "constant-then-geometric bound needs a schedule with switch metadata");
  }
  if (schedule.horizon() != horizon) {
    throw InvalidInputError("schedule horizon does not match T");
  }
  const std::size_t ts = schedule.t_switch;
  if (ts > horizon) throw InvalidInputError("switch time exceeds horizon");
  const double gamma = std::sqrt(1.0 - c.mu * eta);
  if (std::abs(schedule.gamma - gamma) > 1e-12) {
    throw InvalidInputError(
        "schedule contraction factor does not match sqrt(1 - mu*eta)");
  }
  const double floor = schedule.floor;
  if (ts > 0 && !(floor > 0.0)) {
    throw InvalidInputError("floor phase requires a positive power floor");
  }

  const double decay = std::pow(1.0 - c.mu * eta, static_cast<double>(horizon));
  const double T = static_cast<double>(horizon);
  double floor_sum = 0.0;
  double geometric_sum = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double e = static_cast<double>(horizon - t - 1);
    if (t < ts) {
      floor_sum += std::pow(gamma, 2.0 * e);
    } else {
      geometric_sum += std::pow(gamma, e);
    }
  }
  // Geometric phase: sum_t gamma^{2e} / sigma_t^2 with sigma_t^2 =
  // gamma^e * residual / geometric_sum collapses to geometric_sum^2 / residual.
  double noise_term = ts > 0 ? floor_sum / floor : 0.0;
  if (ts < horizon) {
    noise_term += geometric_sum * geometric_sum /
                  (T * avg_budget - static_cast<double>(ts) * floor);
  }
  return decay * z0 + c.L * c.G * c.G * eta * eta * noise_power * noise_term;
}

double local_power_floor(const ProblemConstants& c, double eta,
                         double noise_bound) {
  c.validate();
  if (!(noise_bound >= 0.0)) {
    throw InvalidInputError("noise bound Delta must be nonnegative");
  }
  check_positive(eta, "step size");
  if (!(c.G * eta < c.D)) {
    std::ostringstream os;
    os << "power floor requires eta < D/G = " << c.D / c.G
       << ", got eta = " << eta;
    throw InvalidInputError(os.str());
  }
  double radius_term = 0.0;
  if (c.D < kUnbounded) {
    const double gap = c.D - c.G * eta;
    radius_term = eta * eta / (gap * gap);
  }
  const double level_term = c.local() ? 2.0 / (c.mu * c.v) : 0.0;
  return c.G * c.G * noise_bound * noise_bound *
         std::max(radius_term, level_term);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  using detail::format_double;
  out << "t,z_t,sigma_sq_t,grad_norm,containment_flag\n";
  for (std::size_t t = 0; t < trace.z.size(); ++t) {
    out << t << ',' << format_double(trace.z[t]) << ',';
    if (t < trace.sigma_sq.size()) out << format_double(trace.sigma_sq[t]);
    out << ',' << format_double(trace.grad_norm[t]) << ','
        << static_cast<int>(trace.contained[t]) << '\n';
  }
}

}  // namespace pagd
