#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "pagd/descent.hpp"

namespace pagd {

/// f(x) = 0.5 x' diag(h) x with f* = 0. mu and L are the extreme entries of h;
/// G is the largest gradient norm on {f <= f(x0)}, inflated by 5%.
ObjectiveOracle make_quadratic_oracle(const Eigen::VectorXd& curvature,
                                      const Eigen::VectorXd& x0);

/// Curvatures spread evenly over [mu, L] in `dim` coordinates.
Eigen::VectorXd linear_spectrum(std::size_t dim, double mu, double L);

struct NonconvexPlOptions {
  std::size_t dim = 2;
  double level = 20.0;   // v: the feasible set is {f <= v}
  double radius = 1.0;   // D
  double margin = 0.9;   // PL constant is deflated by this factor
};

/// Radial nonconvex PL objective f(x) = |x|^2 + 3 sin^2(|x|), minimized at 0.
/// L = 8 holds globally; mu and G are certified numerically on {f <= v}.
ObjectiveOracle make_nonconvex_pl_oracle(const NonconvexPlOptions& options);

/// Radius r with f(r) = value along any ray.
double nonconvex_pl_radius(double value);

}  // namespace pagd
