#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pagd/descent.hpp"
#include "pagd/errors.hpp"
#include "pagd/objectives.hpp"
#include "pagd/replicate.hpp"

namespace pagd {
namespace {

ChannelSpec channel_for(const ObjectiveOracle& o, double power, double bound = 1.0) {
  return {power, bound, o.constants.G, o.dim, NoiseModel::kTwoPointRadius};
}

TEST(RunPagd, NoiselessIsotropicQuadraticContractsExactly) {
  const double mu = 0.8, eta = 0.3;
  const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(4, -1, 2);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::Constant(4, mu), x0);
  const auto schedule = geometric_schedule(25, 1.0, mu, eta);
  const auto trace = run_pagd(oracle, schedule, channel_for(oracle, 0.0), x0, eta, 1);
  const double z0 = trace.z.front();
  for (std::size_t t = 0; t <= 25; ++t) {
    const double expected = std::pow(1.0 - eta * mu, 2.0 * t) * z0;
    EXPECT_NEAR(trace.z[t], expected, 1e-13 * z0);
  }
}

TEST(RunPagd, ZeroIterations) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(3);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::Ones(3), x0);
  const auto trace =
      run_pagd(oracle, constant_schedule(0, 1.0), channel_for(oracle, 0.1), x0, 0.5, 4);
  ASSERT_EQ(trace.z.size(), 1u);
  EXPECT_DOUBLE_EQ(trace.z[0], 1.5);
  EXPECT_EQ(trace.iterates.size(), 1u);
  EXPECT_TRUE(trace.sigma_sq.empty());
}

TEST(RunPagd, TraceShapes) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(3);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::LinSpaced(3, 1, 2), x0);
  const auto trace = run_pagd(oracle, geometric_schedule(12, 1.0, 1.0, 0.25),
                              channel_for(oracle, 0.1), x0, 0.25, 9);
  EXPECT_EQ(trace.iterates.size(), 13u);
  EXPECT_EQ(trace.z.size(), 13u);
  EXPECT_EQ(trace.grad_norm.size(), 13u);
  EXPECT_EQ(trace.contained.size(), 13u);
  EXPECT_EQ(trace.sigma_sq.size(), 12u);
  EXPECT_EQ(trace.noise_seeds.size(), 12u);
  EXPECT_EQ(trace.noise_seeds[3], derive_seed(9, 3));
  EXPECT_EQ(trace.policy, SchedulePolicy::kGeometric);
  EXPECT_DOUBLE_EQ(trace.gamma, std::sqrt(0.75));
}

TEST(RunPagd, LongRunsDropIterates) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::Ones(2), x0);
  const auto trace = run_pagd(oracle, constant_schedule(RunTrace::kMaxStoredIterates + 1, 1.0),
                              channel_for(oracle, 0.0), x0, 0.1, 1);
  EXPECT_TRUE(trace.iterates.empty());
  EXPECT_EQ(trace.z.size(), RunTrace::kMaxStoredIterates + 2);
}

TEST(RunPagd, DeterministicTraces) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(5);
  const auto oracle = make_quadratic_oracle(linear_spectrum(5, 1, 2), x0);
  const auto s = geometric_schedule(50, 1.0, 1.0, 0.25);
  const auto a = run_pagd(oracle, s, channel_for(oracle, 0.3), x0, 0.25, 17);
  const auto b = run_pagd(oracle, s, channel_for(oracle, 0.3), x0, 0.25, 17);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.iterates, b.iterates);
  const auto c = run_pagd(oracle, s, channel_for(oracle, 0.3), x0, 0.25, 18);
  EXPECT_NE(a.z, c.z);
}

TEST(RunPagd, RejectsBadInputs) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(3);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::Ones(3), x0);
  const auto s = constant_schedule(5, 1.0);
  EXPECT_THROW(run_pagd(oracle, s, channel_for(oracle, 0.1), x0, 0.0, 1), InvalidInputError);
  ChannelSpec wrong = channel_for(oracle, 0.1);
  wrong.dim = 2;
  EXPECT_THROW(run_pagd(oracle, s, wrong, x0, 0.1, 1), InvalidInputError);
}

TEST(RunPagd, LocalModeNeedsHalfLevelStart) {
  NonconvexPlOptions opts;
  opts.dim = 2;
  const auto oracle = make_nonconvex_pl_oracle(opts);
  const double r = nonconvex_pl_radius(0.6 * opts.level);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, r / std::sqrt(2.0));
  EXPECT_THROW(run_pagd(oracle, constant_schedule(3, 1.0), channel_for(oracle, 0.0), x0, 0.01, 1),
               InvalidInputError);
}

TEST(RunConstantPower, MatchesConstantSchedule) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(4);
  const auto oracle = make_quadratic_oracle(linear_spectrum(4, 1, 2), x0);
  const auto a = run_constant_power(oracle, 2.0, channel_for(oracle, 0.2), x0, 0.3, 40, 5);
  const auto b = run_pagd(oracle, constant_schedule(40, 2.0), channel_for(oracle, 0.2), x0, 0.3, 5);
  EXPECT_EQ(a.z, b.z);
  EXPECT_THROW(run_constant_power(oracle, 2.0, channel_for(oracle, 0.2), x0, 0.5, 40, 5),
               InvalidInputError);
}

TEST(RunConstantPower, NoiselessIsGradientDescent) {
  const Eigen::VectorXd h = linear_spectrum(3, 1, 2);
  const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(3, 1, 3);
  const auto oracle = make_quadratic_oracle(h, x0);
  const auto trace = run_constant_power(oracle, 1.0, channel_for(oracle, 0.0), x0, 0.4, 30, 2);
  Eigen::VectorXd x = x0;
  for (std::size_t t = 0; t < 30; ++t) x -= 0.4 * h.cwiseProduct(x);
  EXPECT_LE((trace.iterates.back() - x).norm(), 1e-14);
}

TEST(RunPagd, NoiselessDescentIsMonotone) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(6);
  const auto oracle = make_quadratic_oracle(linear_spectrum(6, 1, 2), x0);
  const auto trace = run_pagd(oracle, geometric_schedule(60, 1.0, 1.0, 0.25),
                              channel_for(oracle, 0.0), x0, 0.25, 1);
  for (std::size_t t = 0; t + 1 < trace.z.size(); ++t) EXPECT_LE(trace.z[t + 1], trace.z[t]);
}

// ----- bounds, checked against direct arithmetic ----- //

ProblemConstants globals(double mu, double L, double G) {
  ProblemConstants c;
  c.mu = mu;
  c.L = L;
  c.G = G;
  return c;
}

TEST(ConstantPowerBound, WorkedExample) {
  const double b = constant_power_bound(globals(1, 2, 1), 0.25, 10, 1.0, 0.1, 1.0);
  EXPECT_NEAR(b, std::pow(0.75, 10) + 2.0 * 0.25 * 0.1, 1e-15);
  EXPECT_NEAR(b, 0.1063, 5e-5);
}

TEST(ConstantPowerBound, NoiselessAndLimit) {
  const auto c = globals(1, 2, 1.5);
  EXPECT_DOUBLE_EQ(constant_power_bound(c, 0.2, 7, 1.0, 0.0, 3.0), std::pow(0.8, 7) * 3.0);
  EXPECT_NEAR(constant_power_bound(c, 0.2, 100000, 2.0, 0.4, 3.0), 2.0 * 2.25 * 0.2 * 0.2, 1e-14);
  EXPECT_THROW(constant_power_bound(c, 0.5, 7, 1.0, 0.1, 1.0), InvalidInputError);
}

TEST(GeometricBound, SingleStepAndNoiseless) {
  const auto c = globals(1, 2, 3);
  const auto one = geometric_bound(c, 0.2, 1, 2.0, 0.5, 1.0);
  EXPECT_NEAR(one.tight, 0.8 + 2 * 9 * 0.04 * 0.25, 1e-15);
  const auto quiet = geometric_bound(c, 0.2, 9, 2.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(quiet.tight, quiet.loose);
  EXPECT_DOUBLE_EQ(quiet.tight, std::pow(0.8, 9));
}

TEST(GeometricBound, TightNeverExceedsLoose) {
  for (double mu_eta : {1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5}) {
    const double mu = 1.0, L = 0.5 / mu_eta;  // eta = 1/(2L) exactly
    const auto c = globals(mu, std::max(L, mu), 2.0);
    const double eta = std::min(mu_eta / mu, 0.5 / c.L);
    for (std::size_t T : {1u, 2u, 10u, 100u, 1000u}) {
      const auto b = geometric_bound(c, eta, T, 1.0, 0.3, 2.0);
      EXPECT_LE(b.tight, b.loose * (1 + 1e-12)) << mu_eta << " " << T;
    }
  }
}

TEST(GeometricBound, StepRange) {
  const auto c = globals(1, 2, 1);
  EXPECT_NO_THROW(geometric_bound(c, 0.25, 5, 1, 0.1, 1));
  EXPECT_THROW(geometric_bound(c, 0.26, 5, 1, 0.1, 1), InvalidInputError);
}

ProblemConstants locals() {
  ProblemConstants c;
  c.mu = 1.0;
  c.L = 2.0;
  c.G = 1.0;
  c.D = 1.0;
  c.v = 4.0;
  return c;
}

TEST(LocalPowerFloor, WorkedExample) {
  EXPECT_NEAR(local_power_floor(locals(), 0.1, 1.0), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(local_power_floor(locals(), 0.1, 0.0), 0.0);
  EXPECT_THROW(local_power_floor(locals(), 1.0, 1.0), InvalidInputError);
  // Branches meet when eta^2/(D - G eta)^2 = 2/(mu v) = 0.5.
  const double eta = std::sqrt(0.5) / (1.0 + std::sqrt(0.5));
  EXPECT_NEAR(local_power_floor(locals(), eta, 1.0), 0.5, 1e-14);
}

double ctg_bound_closed_form(const ProblemConstants& c, double eta, std::size_t T,
                             double avg, double noise, const PowerSchedule& s, double z0) {
  // Geometric sums in closed form, independent of the term-by-term loop.
  const double g = std::sqrt(1.0 - c.mu * eta);
  const double ts = static_cast<double>(s.t_switch);
  const double n = static_cast<double>(T);
  const double g2 = g * g;
  const double floor_sum = std::pow(g2, n - ts) * (1.0 - std::pow(g2, ts)) / (1.0 - g2);
  const double geo_sum = (1.0 - std::pow(g, n - ts)) / (1.0 - g);
  double term = s.t_switch > 0 ? floor_sum / s.floor : 0.0;
  if (s.t_switch < T) term += geo_sum * geo_sum / (n * avg - ts * s.floor);
  return std::pow(1.0 - c.mu * eta, n) * z0 + c.L * c.G * c.G * eta * eta * noise * term;
}

TEST(CtgBound, MidSwitchAgreesWithClosedForm) {
  // gamma = 0.95, T = 20, budget 1, floor 0.8.
  ProblemConstants c = locals();
  c.mu = 1.0;
  c.L = 2.0;
  c.G = 0.1;
  const double eta = 1.0 - 0.95 * 0.95;
  c.L = 0.24 / eta;  // keeps eta below 1/(4L)
  const auto s = ctg_schedule(20, 1.0, c.mu, eta, 0.8);
  ASSERT_GT(s.t_switch, 0u);
  ASSERT_LT(s.t_switch, 20u);
  const double a = ctg_bound(c, eta, 20, 1.0, 0.3, s, 2.0);
  const double b = ctg_bound_closed_form(c, eta, 20, 1.0, 0.3, s, 2.0);
  EXPECT_NEAR(a, b, 1e-12 * b);
}

TEST(CtgBound, NoSwitchReducesToGeometricTight) {
  ProblemConstants c = locals();
  c.G = 0.5;
  const double eta = 0.1;
  const auto s = ctg_schedule(30, 1.0, c.mu, eta, 0.0);
  ASSERT_EQ(s.t_switch, 0u);
  const double a = ctg_bound(c, eta, 30, 1.0, 0.2, s, 1.5);
  const double b = geometric_bound(c, eta, 30, 1.0, 0.2, 1.5).tight;
  EXPECT_NEAR(a, b, 1e-13 * b);
}

TEST(CtgBound, AllFloorKeepsOnlyFloorSum) {
  ProblemConstants c = locals();
  c.G = 0.5;
  const double eta = 0.1;
  PowerSchedule s = constant_schedule(10, 0.7);
  s.policy = SchedulePolicy::kCtg;
  s.t_switch = 10;
  s.floor = 0.7;
  s.gamma = std::sqrt(1.0 - eta);
  double sum = 0.0;
  for (int t = 0; t < 10; ++t) sum += std::pow(1.0 - eta, 9 - t);
  const double expected = std::pow(0.9, 10) * 1.0 + 2.0 * 0.25 * 0.01 * 0.3 * sum / 0.7;
  EXPECT_NEAR(ctg_bound(c, eta, 10, 0.7, 0.3, s, 1.0), expected, 1e-14);
}

TEST(CtgBound, RejectsScheduleWithoutMetadata) {
  ProblemConstants c = locals();
  c.G = 0.5;
  EXPECT_THROW(ctg_bound(c, 0.1, 10, 1.0, 0.1, constant_schedule(10, 1.0), 1.0),
               InvalidInputError);
  EXPECT_THROW(ctg_bound(c, 0.2, 10, 1.0, 0.1, ctg_schedule(10, 1.0, 1.0, 0.1, 0.0), 1.0),
               InvalidInputError);  // eta above 1/(4L)
}

TEST(ProblemConstants, Ordering) {
  ProblemConstants c = globals(3, 2, 1);
  EXPECT_THROW(c.validate(), InvalidInputError);
}

// ----- containment and dominance on the synthetic objectives ----- //

TEST(Containment, LocalOracleStaysInSublevelSet) {
  NonconvexPlOptions opts;
  opts.dim = 3;
  const auto oracle = make_nonconvex_pl_oracle(opts);
  const auto& c = oracle.constants;
  const double eta = 0.9 * std::min(c.D / c.G, 0.25 / c.L);
  const double floor = local_power_floor(c, eta, 1.0);
  const auto s = ctg_schedule(80, 1.5 * floor, c.mu, eta, floor);
  const double r = nonconvex_pl_radius(0.5 * c.v);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, r / std::sqrt(3.0));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto trace = run_pagd(oracle, s, channel_for(oracle, 0.5), x0, eta, seed);
    EXPECT_EQ(trace.sublevel_violations, 0u);
    EXPECT_EQ(trace.radius_violations, 0u);
  }
}

TEST(Containment, StarvedFloorIsDetected) {
  // A budget far below the floor lets the noise throw iterates out.
  NonconvexPlOptions opts;
  opts.dim = 3;
  const auto oracle = make_nonconvex_pl_oracle(opts);
  const auto& c = oracle.constants;
  const double eta = 0.9 * std::min(c.D / c.G, 0.25 / c.L);
  const double r = nonconvex_pl_radius(0.5 * c.v);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, r / std::sqrt(3.0));
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto trace = run_pagd(oracle, constant_schedule(50, 1e-4),
                                channel_for(oracle, 1.0), x0, eta, seed);
    violations += trace.radius_violations;
  }
  EXPECT_GT(violations, 0u);
}

TEST(Dominance, GeometricBeatsConstantOnQuadratic) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(4);
  const auto oracle = make_quadratic_oracle(linear_spectrum(4, 1, 2), x0);
  const double eta = 0.25;
  const auto geo = geometric_schedule(60, 1.0, 1.0, eta);
  const auto flat = constant_schedule(60, 1.0);
  const ChannelSpec ch = channel_for(oracle, 0.2);
  const auto diffs = replicate(400, 3, [&](std::size_t, std::uint64_t seed) {
    return run_pagd(oracle, geo, ch, x0, eta, seed).final_suboptimality() -
           run_pagd(oracle, flat, ch, x0, eta, seed).final_suboptimality();
  });
  const Summary s = summarize(diffs);
  EXPECT_LT(s.mean + 3.0 * s.std_error, 0.0);
}

TEST(TraceCsv, HeaderAndRows) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  const auto oracle = make_quadratic_oracle(Eigen::VectorXd::Ones(2), x0);
  const auto trace = run_pagd(oracle, constant_schedule(2, 1.0), channel_for(oracle, 0.0), x0, 0.5, 1);
  std::ostringstream os;
  write_trace_csv(os, trace);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,z_t,sigma_sq_t,grad_norm,containment_flag");
  EXPECT_NE(text.find("\n0,1,1,"), std::string::npos);
  EXPECT_NE(text.find("\n2,0.0625,,"), std::string::npos);
}

}  // namespace
}  // namespace pagd
