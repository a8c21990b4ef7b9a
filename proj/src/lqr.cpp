#include "pagd/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pagd/errors.hpp"

namespace pagd::lqr {
namespace {

constexpr Eigen::Index kDirectSolveLimit = 30;

bool symmetric(const Eigen::MatrixXd& M) {
  return (M - M.transpose()).norm() <= 1e-10 * std::max(1.0, M.norm());
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

void check_spd(const Eigen::MatrixXd& M, Eigen::Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << M.rows() << "x"
       << M.cols();
    throw InvalidInputError(os.str());
  }
  if (!symmetric(M) || !(min_eigenvalue(M) > 0.0)) {
    throw InvalidInputError(std::string(name) +
                            " must be symmetric positive definite");
  }
}

void check_gain(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  if (K.rows() != inst.inputs() || K.cols() != inst.states()) {
    std::ostringstream os;
    os << "gain must be " << inst.inputs() << "x" << inst.states() << ", got "
       << K.rows() << "x" << K.cols();
    throw InvalidInputError(os.str());
  }
}

Eigen::MatrixXd closed_loop(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  check_gain(inst, K);
  return inst.A + inst.B * K;
}

Eigen::MatrixXd lyapunov_residual(const Eigen::MatrixXd& M,
                                  const Eigen::MatrixXd& S,
                                  const Eigen::MatrixXd& X) {
  return S + M.transpose() * X * M - X;
}

Eigen::MatrixXd solve_kronecker(const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& S) {
  const Eigen::Index n = M.rows();
  const Eigen::MatrixXd Mt = M.transpose();
  // vec(M' X M) = (M' kron M') vec(X), column-major vec.
  Eigen::MatrixXd op = Eigen::MatrixXd::Identity(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) -= Mt(i, j) * Mt;
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(op);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
  Eigen::VectorXd x = lu.solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  // One round of iterative refinement for nearly unstable M.
  const Eigen::MatrixXd r = lyapunov_residual(M, S, X);
  const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), n * n);
  x = lu.solve(rv);
  X += Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  return X;
}

Eigen::MatrixXd solve_smith(const Eigen::MatrixXd& M, const Eigen::MatrixXd& S) {
  Eigen::MatrixXd X = S;
  Eigen::MatrixXd power = M;
  for (int it = 0; it < 100; ++it) {
    const Eigen::MatrixXd increment = power.transpose() * X * power;
    X += increment;
    if (increment.norm() <= 1e-14 * X.norm()) return X;
    power = power * power;
  }
  throw NumericalError("squared Smith iteration did not converge");
}

}  // namespace

void LqrInstance::validate() const {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) {
    throw InvalidInputError("A must be a nonempty square matrix");
  }
  if (B.rows() != n || B.cols() == 0) {
    throw InvalidInputError("B must have as many rows as A and at least one column");
  }
  check_spd(Q, n, "Q");
  check_spd(R, B.cols(), "R");
  check_spd(Sigma_w, n, "Sigma_w");
  if (!controllable(A, B)) {
    throw InvalidInputError("(A, B) is not controllable");
  }
}

bool controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  // [B AB A^2B ... A^{n-1}B]
  Eigen::MatrixXd ctrb(n, n * m);
  ctrb.leftCols(m) = B;
  for (Eigen::Index i = 1; i < n; ++i) {
    ctrb.middleCols(i * m, m) = A * ctrb.middleCols((i - 1) * m, m);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrb);
  return qr.rank() == n;
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M,
                               const Eigen::MatrixXd& S) {
  if (M.rows() != M.cols() || S.rows() != M.rows() || S.cols() != M.cols()) {
    throw InvalidInputError("Lyapunov operands must be square and equal size");
  }
  const double rho = spectral_radius(M);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "closed loop is not Schur stable (spectral radius " << rho << ")";
    throw InstabilityError(os.str());
  }
  Eigen::MatrixXd X = M.rows() <= kDirectSolveLimit ? solve_kronecker(M, S)
                                                     : solve_smith(M, S);
  if (symmetric(S)) X = 0.5 * (X + X.transpose()).eval();
  const double residual = lyapunov_residual(M, S, X).norm();
  if (!(residual <= 1e-10 * std::max(X.norm(), 1e-300))) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " exceeds 1e-10 relative";
    throw NumericalError(os.str());
  }
  return X;
}

Eigen::MatrixXd state_covariance(const LqrInstance& inst,
                                 const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd M = closed_loop(inst, K);
  return solve_lyapunov(M.transpose(), inst.Sigma_w);
}

Eigen::MatrixXd value_matrix(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd M = closed_loop(inst, K);
  const Eigen::MatrixXd stage = inst.Q + K.transpose() * inst.R * K;
  return solve_lyapunov(M, stage);
}

double cost(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd sigma = state_covariance(inst, K);
  return ((inst.Q + K.transpose() * inst.R * K) * sigma).trace();
}

double cost_left_transpose(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd M = closed_loop(inst, K);
  const Eigen::MatrixXd sigma = solve_lyapunov(M, inst.Sigma_w);
  return ((inst.Q + K.transpose() * inst.R * K) * sigma).trace();
}

Eigen::MatrixXd gradient(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd sigma = state_covariance(inst, K);
  const Eigen::MatrixXd P = value_matrix(inst, K);
  const Eigen::MatrixXd BtP = inst.B.transpose() * P;
  return 2.0 * ((inst.R + BtP * inst.B) * K + BtP * inst.A) * sigma;
}

Policy evaluate_policy(const LqrInstance& inst, const Eigen::MatrixXd& K) {
  Policy p;
  p.K = K;
  p.stable = spectral_radius(closed_loop(inst, K)) < 1.0;
  if (p.stable) p.cost = cost(inst, K);
  return p;
}

ReferenceSolution reference_optimum(const LqrInstance& inst) {
  inst.validate();
  const Eigen::MatrixXd& A = inst.A;
  const Eigen::MatrixXd& B = inst.B;
  Eigen::MatrixXd P = inst.Q;
  constexpr int kMaxIterations = 100000;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd gain =
        (inst.R + BtP * B).ldlt().solve(BtP * A);  // (R + B'PB)^{-1} B'PA
    Eigen::MatrixXd next = inst.Q + A.transpose() * P * A - (BtP * A).transpose() * gain;
    next = 0.5 * (next + next.transpose()).eval();
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= 1e-12 * P.norm()) {
      ReferenceSolution ref;
      const Eigen::MatrixXd BtPf = B.transpose() * P;
      ref.K = -(inst.R + BtPf * B).ldlt().solve(BtPf * A);
      ref.P = P;
      ref.cost = cost(inst, ref.K);
      ref.iterations = it;
      return ref;
    }
    if (!P.allFinite()) break;
  }
  throw NumericalError("Riccati value iteration did not converge in 1e5 steps");
}

ProblemConstants LqrConstants::problem_constants() const {
  ProblemConstants c;
  c.mu = mu;
  c.L = L;
  c.G = G;
  c.D = D;
  c.v = J_cap;
  return c;
}

LqrConstants regularity_constants(const LqrInstance& inst, double J_cap,
                                  double optimal_cost) {
  if (!(J_cap >= 4.0 * optimal_cost)) {
    std::ostringstream os;
    os << "cost cap " << J_cap << " is below 4 J* = " << 4.0 * optimal_cost;
    throw InvalidCapError(os.str());
  }
  LqrConstants c;
  c.J_cap = J_cap;
  c.beta0 = std::min(min_eigenvalue(inst.Q), min_eigenvalue(inst.R));
  c.beta1 = std::max(max_eigenvalue(inst.Q), max_eigenvalue(inst.R));
  c.sigma_w_sq = min_eigenvalue(inst.Sigma_w);
  c.psi = std::max(1.0, inst.B.norm());

  const double J = J_cap;
  const double scale = J / (c.beta0 * c.sigma_w_sq);
  c.zeta = std::sqrt(scale);
  c.xi = 1.0 / (2.0 * c.zeta * c.zeta);
  c.G = 2.0 * scale * std::sqrt((c.sigma_w_sq + c.psi * c.psi * J) * J);
  const double zeta4 = std::pow(c.zeta, 4);
  c.L = 112.0 * std::sqrt(static_cast<double>(inst.states())) * J * c.psi *
        c.psi * zeta4 * zeta4 / c.beta0;
  c.D = 1.0 / (c.psi * c.zeta * c.zeta * c.zeta);
  c.mu = 2.0 * J / zeta4;

  if (c.zeta < 1.0) c.warnings.emplace_back("zeta < 1");
  if (c.beta1 > 1.0) {
    c.warnings.emplace_back("beta1 > 1: Q and R are not normalized");
  }
  return c;
}

LqrConstants regularity_constants(const LqrInstance& inst, double J_cap) {
  return regularity_constants(inst, J_cap, reference_optimum(inst).cost);
}

double default_cost_cap(double optimal_cost, double margin) {
  return 4.0 * optimal_cost * (1.0 + margin);
}

std::vector<Eigen::MatrixXd> sample_sublevel(const LqrInstance& inst,
                                             const Eigen::MatrixXd& center,
                                             double level, std::size_t count,
                                             std::uint64_t seed) {
  check_gain(inst, center);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(std::log(1e-3),
                                                   std::log(2.0));
  const double reference = std::max(1.0, center.norm());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  const std::size_t max_attempts = 10000 * std::max<std::size_t>(count, 1);
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt >= max_attempts) {
      throw NumericalError("sublevel rejection sampling exhausted its budget");
    }
    Eigen::MatrixXd E(center.rows(), center.cols());
    for (Eigen::Index i = 0; i < E.size(); ++i) E(i) = normal(rng);
    const double s = reference * std::exp(log_scale(rng));
    Eigen::MatrixXd K = center + (s / E.norm()) * E;
    if (spectral_radius(closed_loop(inst, K)) >= 1.0) continue;
    if (cost(inst, K) <= level) out.push_back(std::move(K));
  }
  return out;
}

ProblemConstants estimate_constants(const LqrInstance& inst, double level,
                                    const ReferenceSolution& ref,
                                    const EmpiricalOptions& options) {
  if (!(level > ref.cost)) {
    throw InvalidInputError("estimation level must exceed the optimal cost");
  }
  const std::vector<Eigen::MatrixXd> samples =
      sample_sublevel(inst, ref.K, level, options.samples, options.seed);
  std::mt19937_64 rng(derive_seed(options.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_direction = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd E(rows, cols);
    for (Eigen::Index i = 0; i < E.size(); ++i) E(i) = normal(rng);
    return Eigen::MatrixXd(E / E.norm());
  };
  auto stable = [&](const Eigen::MatrixXd& K) {
    return spectral_radius(inst.A + inst.B * K) < 1.0;
  };

  double mu = kUnbounded;
  double g_max = 0.0;
  double radius = kUnbounded;
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(samples.size());
  for (const Eigen::MatrixXd& K : samples) {
    const Eigen::MatrixXd g = gradient(inst, K);
    grads.push_back(g);
    const double gap = cost(inst, K) - ref.cost;
    if (gap > 1e-10 * ref.cost) {
      mu = std::min(mu, g.squaredNorm() / (2.0 * gap));
    }
    g_max = std::max(g_max, g.norm());
    for (std::size_t d = 0; d < options.directions; ++d) {
      const Eigen::MatrixXd E = random_direction(K.rows(), K.cols());
      double lo = 0.0;
      double hi = 1e-3;
      while (stable(K + hi * E) && hi < 1e3) {
        lo = hi;
        hi *= 2.0;
      }
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (stable(K + mid * E) ? lo : hi) = mid;
      }
      radius = std::min(radius, lo);
    }
  }
  if (!std::isfinite(mu)) {
    throw NumericalError("no sampled policy away from the optimum");
  }

  ProblemConstants c;
  c.mu = 0.95 * mu;
  c.G = 1.05 * g_max;
  c.D = 0.25 * radius;
  c.v = level;
  double L = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t d = 0; d < options.directions; ++d) {
      const double step = c.D * std::max(unif(rng), 1e-3);
      const Eigen::MatrixXd delta =
          step * random_direction(samples[s].rows(), samples[s].cols());
      const Eigen::MatrixXd g = gradient(inst, samples[s] + delta);
      L = std::max(L, (g - grads[s]).norm() / delta.norm());
    }
  }
  c.L = std::max(1.05 * L, c.mu);
  return c;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& K) {
  Eigen::VectorXd x(K.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) x[k++] = K(i, j);
  }
  return x;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& x, Eigen::Index rows,
                          Eigen::Index cols) {
  if (x.size() != rows * cols) {
    throw InvalidInputError("flattened gain has the wrong length");
  }
  Eigen::MatrixXd K(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) K(i, j) = x[k++];
  }
  return K;
}

ObjectiveOracle make_lqr_oracle(const LqrInstance& inst,
                                const ProblemConstants& constants,
                                double optimal_cost) {
  const Eigen::Index m = inst.inputs();
  const Eigen::Index n = inst.states();
  ObjectiveOracle oracle;
  oracle.dim = static_cast<std::size_t>(m * n);
  oracle.eval = [inst, m, n](const Eigen::VectorXd& x) {
    return cost(inst, unflatten(x, m, n));
  };
  oracle.grad = [inst, m, n](const Eigen::VectorXd& x) {
    return flatten(gradient(inst, unflatten(x, m, n)));
  };
  oracle.f_star = optimal_cost;
  oracle.constants = constants;
  return oracle;
}

Eigen::MatrixXd initial_policy(const LqrInstance& inst,
                               const ReferenceSolution& ref,
                               double target_cost) {
  if (!(target_cost > ref.cost)) {
    throw InvalidInputError("target cost must exceed the optimal cost");
  }
  const Eigen::MatrixXd E =
      Eigen::MatrixXd::Constant(ref.K.rows(), ref.K.cols(),
                                1.0 / std::sqrt(static_cast<double>(ref.K.size())));
  auto inside = [&](double s) {
    const Policy p = evaluate_policy(inst, ref.K + s * E);
    return p.stable && p.cost <= target_cost;
  };
  double lo = 0.0;
  double hi = 1e-3 * std::max(1.0, ref.K.norm());
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("cost does not grow along the ray");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return ref.K + lo * E;
}

LqrRun run_pagd_lqr(const LqrInstance& inst, const Eigen::MatrixXd& K0,
                    double eta, std::size_t horizon, double avg_budget,
                    ChannelSpec channel, std::uint64_t seed,
                    const LqrRunOptions& options) {
  LqrRun run;
  run.reference = reference_optimum(inst);
  const double J_star = run.reference.cost;
  const double J_cap = options.cost_cap.value_or(default_cost_cap(J_star));

  if (options.mode == ConstantsMode::kLemma) {
    run.constants = regularity_constants(inst, J_cap, J_star).problem_constants();
  } else {
    run.constants = estimate_constants(inst, J_cap, run.reference, options.empirical);
  }

  check_gain(inst, K0);
  const Policy start = evaluate_policy(inst, K0);
  if (!start.stable) {
    throw InvalidInputError("initial gain does not stabilize the system");
  }
  if (!(start.cost <= 0.5 * J_cap)) {
    std::ostringstream os;
    os << "initial gain needs J(K0) <= J_cap/2: J(K0) = " << start.cost
       << ", J_cap/2 = " << 0.5 * J_cap;
    throw InvalidInputError(os.str());
  }
  check_local_step(run.constants, eta);
  run.power_floor = local_power_floor(run.constants, eta, channel.noise_bound);
  run.schedule = ctg_schedule(horizon, avg_budget, run.constants.mu, eta,
                              run.power_floor);

  channel.grad_bound = run.constants.G;
  channel.dim = static_cast<std::size_t>(K0.size());
  const ObjectiveOracle oracle = make_lqr_oracle(inst, run.constants, J_star);
  run.trace = run_pagd(oracle, run.schedule, channel, flatten(K0), eta, seed);
  run.bound = ctg_bound(run.constants, eta, horizon, avg_budget,
                        channel.noise_power, run.schedule, start.cost - J_star);
  return run;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& value,
                                 const std::string& name) {
  if (value.is_number()) return Eigen::MatrixXd::Constant(1, 1, value.get<double>());
  if (!value.is_array() || value.empty()) {
    throw InvalidInputError(name + " must be a nonempty nested array");
  }
  const auto rows = static_cast<Eigen::Index>(value.size());
  const bool flat = value[0].is_number();
  const auto cols = flat ? Eigen::Index{1} : static_cast<Eigen::Index>(value[0].size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = value[static_cast<std::size_t>(i)];
    if (flat) {
      if (!row.is_number()) throw InvalidInputError(name + " has mixed rows");
      M(i, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInputError(name + " rows must all have the same length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& entry = row[static_cast<std::size_t>(j)];
      if (!entry.is_number()) throw InvalidInputError(name + " has a non-number entry");
      M(i, j) = entry.get<double>();
    }
  }
  return M;
}

LqrInstance instance_from_json(const nlohmann::json& doc) {
  for (const char* key : {"A", "B", "Q", "R", "Sigma_w"}) {
    if (!doc.contains(key)) {
      throw InvalidInputError(std::string("instance is missing field ") + key);
    }
  }
  LqrInstance inst;
  inst.A = matrix_from_json(doc.at("A"), "A");
  inst.B = matrix_from_json(doc.at("B"), "B");
  inst.Q = matrix_from_json(doc.at("Q"), "Q");
  inst.R = matrix_from_json(doc.at("R"), "R");
  inst.Sigma_w = matrix_from_json(doc.at("Sigma_w"), "Sigma_w");
  inst.validate();
  return inst;
}

nlohmann::json instance_to_json(const LqrInstance& inst) {
  return {{"A", matrix_to_json(inst.A)},
          {"B", matrix_to_json(inst.B)},
          {"Q", matrix_to_json(inst.Q)},
          {"R", matrix_to_json(inst.R)},
          {"Sigma_w", matrix_to_json(inst.Sigma_w)}};
}

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open instance file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("malformed instance file " + path.string() + ": " +
                            e.what());
  }
}

}  // namespace

LqrInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json(path));
}

std::optional<Eigen::MatrixXd> load_initial_policy(
    const std::filesystem::path& path) {
  const nlohmann::json doc = read_json(path);
  if (!doc.contains("K0")) return std::nullopt;
  return matrix_from_json(doc.at("K0"), "K0");
}

nlohmann::json reference_to_json(const ReferenceSolution& ref,
                                 const LqrConstants& constants) {
  nlohmann::json c = {{"J_cap", constants.J_cap},
                      {"beta0", constants.beta0},
                      {"beta1", constants.beta1},
                      {"sigma_w_sq", constants.sigma_w_sq},
                      {"psi", constants.psi},
                      {"zeta", constants.zeta},
                      {"xi", constants.xi},
                      {"G", constants.G},
                      {"L", constants.L},
                      {"D", constants.D},
                      {"mu", constants.mu},
                      {"warnings", constants.warnings}};
  return {{"K_star", matrix_to_json(ref.K)},
          {"P", matrix_to_json(ref.P)},
          {"J_star", ref.cost},
          {"iterations", ref.iterations},
          {"constants", std::move(c)}};
}

std::string_view to_string(ConstantsMode mode) {
  return mode == ConstantsMode::kLemma ? "lemma" : "empirical";
}

ConstantsMode parse_constants_mode(std::string_view name) {
  if (name == "lemma") return ConstantsMode::kLemma;
  if (name == "empirical") return ConstantsMode::kEmpirical;
  throw InvalidInputError("unknown constants mode '" + std::string(name) +
                          "' (expected lemma or empirical)");
}

}  // namespace pagd::lqr
