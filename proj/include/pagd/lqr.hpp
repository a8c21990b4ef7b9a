#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pagd/alloc.hpp"
#include "pagd/channel.hpp"
#include "pagd/descent.hpp"

namespace pagd::lqr {

/// x_{t+1} = A x_t + B u_t + w_t,  u_t = K x_t,  w_t ~ (0, Sigma_w)
struct LqrInstance {
  Eigen::MatrixXd A;        // n x n
  Eigen::MatrixXd B;        // n x m
  Eigen::MatrixXd Q;        // n x n, SPD
  Eigen::MatrixXd R;        // m x m, SPD
  Eigen::MatrixXd Sigma_w;  // n x n, SPD

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }

  /// Shapes, symmetric positive definiteness and controllability.
  void validate() const;
};

bool controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
double spectral_radius(const Eigen::MatrixXd& M);

/// Unique symmetric solution of  Sigma = S + M' Sigma M  for Schur-stable M.
/// Direct Kronecker solve up to n = 30, squared Smith iteration beyond.
/// Throws InstabilityError when rho(M) >= 1.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M,
                               const Eigen::MatrixXd& S);

/// Stationary state covariance  Sigma_K = Sigma_w + (A+BK) Sigma_K (A+BK)'.
Eigen::MatrixXd state_covariance(const LqrInstance& inst,
                                 const Eigen::MatrixXd& K);

/// Value matrix  P_K = Q + K'RK + (A+BK)' P_K (A+BK).
Eigen::MatrixXd value_matrix(const LqrInstance& inst, const Eigen::MatrixXd& K);

/// Average cost trace((Q + K'RK) Sigma_K). Throws InstabilityError when
/// A+BK is not Schur stable.
double cost(const LqrInstance& inst, const Eigen::MatrixXd& K);

/// trace((Q + K'RK) S) with S = Sigma_w + (A+BK)' S (A+BK), the covariance
/// recursion with the transpose on the left. Agrees with cost() only when
/// the closed loop is normal; kept for comparison against simulation.
double cost_left_transpose(const LqrInstance& inst, const Eigen::MatrixXd& K);

/// 2 ((R + B'PB) K + B'PA) Sigma_K
Eigen::MatrixXd gradient(const LqrInstance& inst, const Eigen::MatrixXd& K);

struct Policy {
  Eigen::MatrixXd K;
  bool stable = false;
  double cost = std::numeric_limits<double>::infinity();
};

Policy evaluate_policy(const LqrInstance& inst, const Eigen::MatrixXd& K);

struct ReferenceSolution {
  Eigen::MatrixXd K;  // optimal gain
  Eigen::MatrixXd P;  // DARE solution
  double cost = 0.0;  // J*
  int iterations = 0;
};

/// Riccati value iteration to 1e-12 relative change. Throws NumericalError
/// after 1e5 iterations.
ReferenceSolution reference_optimum(const LqrInstance& inst);

/// Regularity constants of J on the sublevel set {K : J(K) <= J_cap}.
struct LqrConstants {
  double J_cap = 0.0;
  double beta0 = 0.0;       // min eigenvalue over Q and R
  double beta1 = 0.0;       // max eigenvalue over Q and R
  double sigma_w_sq = 0.0;  // min eigenvalue of Sigma_w
  double psi = 1.0;         // max(1, ||B||_F)
  double zeta = 0.0;
  double xi = 0.0;
  double G = 0.0;
  double L = 0.0;
  double D = 0.0;
  double mu = 0.0;
  // Normalization assumptions that failed (zeta >= 1, beta1 <= 1).
  std::vector<std::string> warnings;

  ProblemConstants problem_constants() const;
};

/// Throws InvalidCapError when J_cap < 4 J*.
LqrConstants regularity_constants(const LqrInstance& inst, double J_cap,
                                  double optimal_cost);
LqrConstants regularity_constants(const LqrInstance& inst, double J_cap);

/// Default sublevel cap: 4 J* (1 + margin).
double default_cost_cap(double optimal_cost, double margin = 0.1);

/// Rejection sampling from {K : J(K) <= level}: Gaussian perturbations of
/// `center` with log-uniform scales, accepted when the cost is under level.
std::vector<Eigen::MatrixXd> sample_sublevel(const LqrInstance& inst,
                                             const Eigen::MatrixXd& center,
                                             double level, std::size_t count,
                                             std::uint64_t seed);

struct EmpiricalOptions {
  std::size_t samples = 200;
  std::size_t directions = 4;
  std::uint64_t seed = 7;
};

/// Constants measured on sampled policies of {J <= level}: mu from the
/// gradient-domination ratio (x0.95), G from gradient norms (x1.05), D as a
/// quarter of the smallest sampled stability radius, L from gradient
/// differences within D (x1.05). v = level.
ProblemConstants estimate_constants(const LqrInstance& inst, double level,
                                    const ReferenceSolution& ref,
                                    const EmpiricalOptions& options = {});

/// Row-major flattening used for the channel.
Eigen::VectorXd flatten(const Eigen::MatrixXd& K);
Eigen::MatrixXd unflatten(const Eigen::VectorXd& x, Eigen::Index rows,
                          Eigen::Index cols);

/// J(K) as an objective over row-major vec(K), with f* = J*.
ObjectiveOracle make_lqr_oracle(const LqrInstance& inst,
                                const ProblemConstants& constants,
                                double optimal_cost);

/// Gain K* + s E along a fixed direction, with s chosen by bisection so that
/// J = target_cost. target_cost must exceed J*.
Eigen::MatrixXd initial_policy(const LqrInstance& inst,
                               const ReferenceSolution& ref,
                               double target_cost);

enum class ConstantsMode { kLemma, kEmpirical };

std::string_view to_string(ConstantsMode mode);
ConstantsMode parse_constants_mode(std::string_view name);

struct LqrRunOptions {
  std::optional<double> cost_cap;  // default_cost_cap(J*) when unset
  ConstantsMode mode = ConstantsMode::kLemma;
  EmpiricalOptions empirical;
};

struct LqrRun {
  RunTrace trace;
  PowerSchedule schedule;
  ProblemConstants constants;
  ReferenceSolution reference;
  double power_floor = 0.0;
  double bound = 0.0;  // ctg_bound for this run
};

/// Policy gradient over the noisy channel with the constant-then-geometric
/// schedule. The channel's gradient bound and dimension are overwritten with
/// the run's G and m*n. Preconditions (J(K0) <= J_cap/2, the local step-size
/// range, budget >= floor) throw before any iteration.
LqrRun run_pagd_lqr(const LqrInstance& inst, const Eigen::MatrixXd& K0,
                    double eta, std::size_t horizon, double avg_budget,
                    ChannelSpec channel, std::uint64_t seed,
                    const LqrRunOptions& options = {});

// ----- Instance files ----- //
//
// JSON object with nested-array matrices A, B, Q, R, Sigma_w and an optional
// K0. Reference solutions are written with K_star, P, J_star and constants.

LqrInstance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const LqrInstance& inst);
LqrInstance load_instance(const std::filesystem::path& path);
std::optional<Eigen::MatrixXd> load_initial_policy(
    const std::filesystem::path& path);
nlohmann::json reference_to_json(const ReferenceSolution& ref,
                                 const LqrConstants& constants);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& value,
                                 const std::string& name);

}  // namespace pagd::lqr
