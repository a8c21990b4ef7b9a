#include "pagd/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "pagd/errors.hpp"

namespace pagd {
namespace {

// h(r) = r^2 + 3 sin^2 r and its derivative.
double radial_value(double r) {
  const double s = std::sin(r);
  return r * r + 3.0 * s * s;
}

double radial_slope(double r) { return 2.0 * r + 3.0 * std::sin(2.0 * r); }

}  // namespace

Eigen::VectorXd linear_spectrum(std::size_t dim, double mu, double L) {
  if (dim == 0 || !(mu > 0.0) || !(L >= mu)) {
    throw InvalidInputError("spectrum needs dim > 0 and 0 < mu <= L");
  }
  if (dim == 1) return Eigen::VectorXd::Constant(1, mu);
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(dim), mu, L);
}

ObjectiveOracle make_quadratic_oracle(const Eigen::VectorXd& curvature,
                                      const Eigen::VectorXd& x0) {
  if (curvature.size() == 0 || curvature.size() != x0.size()) {
    throw InvalidInputError("curvature and x0 must be nonempty and equal size");
  }
  if (!(curvature.minCoeff() > 0.0)) {
    throw InvalidInputError("quadratic curvatures must be positive");
  }
  ObjectiveOracle oracle;
  oracle.dim = static_cast<std::size_t>(x0.size());
  oracle.eval = [h = curvature](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(h.cwiseProduct(x));
  };
  oracle.grad = [h = curvature](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return h.cwiseProduct(x);
  };
  oracle.f_star = 0.0;

  const double f0 = oracle.eval(x0);
  oracle.constants.mu = curvature.minCoeff();
  oracle.constants.L = curvature.maxCoeff();
  // max |Hx| over 0.5 x'Hx <= f0 is sqrt(2 L f0).
  const double g_max = std::sqrt(2.0 * oracle.constants.L * f0);
  oracle.constants.G = g_max > 0.0 ? 1.05 * g_max : 1.0;
  return oracle;
}

double nonconvex_pl_radius(double value) {
  if (!(value >= 0.0)) throw InvalidInputError("level must be nonnegative");
  // h is increasing on [0, inf) and h(r) >= r^2.
  double lo = 0.0;
  double hi = std::sqrt(value) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (radial_value(mid) < value ? lo : hi) = mid;
  }
  return lo;
}

ObjectiveOracle make_nonconvex_pl_oracle(const NonconvexPlOptions& options) {
  if (options.dim == 0 || !(options.level > 0.0) || !(options.radius > 0.0) ||
      !(options.margin > 0.0 && options.margin <= 1.0)) {
    throw InvalidInputError(
        "nonconvex PL objective needs dim > 0, level > 0, radius > 0 and "
        "margin in (0, 1]");
  }
  ObjectiveOracle oracle;
  oracle.dim = options.dim;
  oracle.eval = [](const Eigen::VectorXd& x) { return radial_value(x.norm()); };
  oracle.grad = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double r = x.norm();
    // h'(r)/r -> 8 as r -> 0
    const double scale = r > 0.0 ? radial_slope(r) / r : 8.0;
    return scale * x;
  };
  oracle.f_star = 0.0;

  // Certify on a grid over the sublevel radius.
  const double r_max = nonconvex_pl_radius(options.level);
  constexpr int kGrid = 200000;
  double pl_ratio = 8.0;
  double slope_max = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double r = r_max * static_cast<double>(i) / kGrid;
    const double slope = radial_slope(r);
    pl_ratio = std::min(pl_ratio, slope * slope / (2.0 * radial_value(r)));
    slope_max = std::max(slope_max, std::abs(slope));
  }
  oracle.constants.mu = options.margin * pl_ratio;
  oracle.constants.L = 8.0;
  oracle.constants.G = 1.05 * slope_max;
  oracle.constants.D = options.radius;
  oracle.constants.v = options.level;
  return oracle;
}

}  // namespace pagd
