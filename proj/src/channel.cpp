#include "pagd/channel.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "pagd/errors.hpp"

namespace pagd {
namespace {

void check_power(double power) {
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw InvalidInputError("transmit power must be positive and finite");
  }
}

// E||n||^2 for an isotropic Gaussian with per-coordinate scale s, conditioned
// on ||n|| <= bound. Uses E[X 1{X<=c}] = d * P(chi2_{d+2} <= c).
double truncated_second_moment(double s, double bound, std::size_t dim) {
  const double d = static_cast<double>(dim);
  const double c = (bound / s) * (bound / s);
  const double kept = boost::math::gamma_p(d / 2.0, c / 2.0);
  const double kept_plus = boost::math::gamma_p(d / 2.0 + 1.0, c / 2.0);
  return s * s * d * kept_plus / kept;
}

// Rounding in r * unit can overshoot the bound by an ulp.
Eigen::VectorXd clamp_to_ball(Eigen::VectorXd v, double bound) {
  while (v.norm() > bound) v *= std::nextafter(1.0, 0.0);
  return v;
}

}  // namespace

std::string_view to_string(NoiseModel model) {
  switch (model) {
    case NoiseModel::kTwoPointRadius:
      return "two-point";
    case NoiseModel::kFixedRadius:
      return "fixed-radius";
    case NoiseModel::kTruncatedGaussian:
      return "truncated-gaussian";
  }
  return "unknown";
}

NoiseModel parse_noise_model(std::string_view name) {
  if (name == "two-point") return NoiseModel::kTwoPointRadius;
  if (name == "fixed-radius") return NoiseModel::kFixedRadius;
  if (name == "truncated-gaussian") return NoiseModel::kTruncatedGaussian;
  throw InvalidInputError(
      "unknown noise model '" + std::string(name) +
      "' (expected two-point, fixed-radius or truncated-gaussian)");
}

void ChannelSpec::validate() const {
  if (dim == 0) throw InvalidInputError("channel dimension must be positive");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) {
    throw InvalidInputError("noise power must be nonnegative and finite");
  }
  if (!(noise_bound > 0.0)) {
    throw InvalidInputError("noise bound Delta must be positive");
  }
  if (!(grad_bound > 0.0) || !std::isfinite(grad_bound)) {
    throw InvalidInputError("gradient bound G must be positive and finite");
  }
  if (noise_bound * noise_bound < noise_power) {
    std::ostringstream os;
    os << "noise bound Delta = " << noise_bound
       << " cannot carry second moment " << noise_power
       << " (need Delta^2 >= sigma_N^2)";
    throw InvalidInputError(os.str());
  }
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseGenerator::NoiseGenerator(const ChannelSpec& spec) : spec_(spec) {
  spec_.validate();
  const double power = spec_.noise_power;
  const double bound = spec_.noise_bound;
  if (power == 0.0) return;

  switch (spec_.model) {
    case NoiseModel::kTwoPointRadius: {
      // r in {sqrt(P/2), Delta}; P(r = Delta) solves the second-moment match.
      const double low_sq = power / 2.0;
      low_radius_ = std::sqrt(low_sq);
      high_probability_ = (power - low_sq) / (bound * bound - low_sq);
      break;
    }
    case NoiseModel::kFixedRadius:
      low_radius_ = std::sqrt(power);
      break;
    case NoiseModel::kTruncatedGaussian: {
      const double d = static_cast<double>(spec_.dim);
      const double ceiling = bound * bound * d / (d + 2.0);
      if (!(power < ceiling)) {
        std::ostringstream os;
        os << "truncated Gaussian noise cannot reach second moment " << power
           << " inside radius " << bound << " (supremum " << ceiling << ")";
        throw InvalidInputError(os.str());
      }
      double lo = std::log(std::sqrt(power / d) * 1e-3);
      double hi = std::log(bound * 1e3);
      while (truncated_second_moment(std::exp(hi), bound, spec_.dim) < power) {
        hi += std::log(10.0);
        if (hi > std::log(bound) + 60.0) {
          throw NumericalError("truncated Gaussian calibration diverged");
        }
      }
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_second_moment(std::exp(mid), bound, spec_.dim) < power) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      gaussian_scale_ = std::exp(0.5 * (lo + hi));
      const double c = (bound / gaussian_scale_) * (bound / gaussian_scale_);
      if (boost::math::gamma_p(d / 2.0, c / 2.0) < 1e-4) {
        throw NumericalError(
            "truncated Gaussian acceptance rate below 1e-4; use another model");
      }
      break;
    }
  }
}

Eigen::VectorXd NoiseGenerator::unit_direction(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(spec_.dim);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

Eigen::VectorXd NoiseGenerator::draw(std::mt19937_64& rng) const {
  const auto dim = static_cast<Eigen::Index>(spec_.dim);
  if (spec_.noise_power == 0.0) return Eigen::VectorXd::Zero(dim);

  switch (spec_.model) {
    case NoiseModel::kTwoPointRadius: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double r =
          unif(rng) < high_probability_ ? spec_.noise_bound : low_radius_;
      return clamp_to_ball(r * unit_direction(rng), spec_.noise_bound);
    }
    case NoiseModel::kFixedRadius:
      return clamp_to_ball(low_radius_ * unit_direction(rng),
                           spec_.noise_bound);
    case NoiseModel::kTruncatedGaussian: {
      std::normal_distribution<double> normal(0.0, gaussian_scale_);
      Eigen::VectorXd v(dim);
      for (;;) {
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
        if (v.norm() <= spec_.noise_bound) return v;
      }
    }
  }
  return Eigen::VectorXd::Zero(dim);
}

Eigen::VectorXd NoiseGenerator::draw(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return draw(rng);
}

Eigen::VectorXd encode(const Eigen::VectorXd& gradient, double power,
                       const ChannelSpec& spec) {
  check_power(power);
  if (!(spec.grad_bound > 0.0)) {
    throw InvalidInputError("gradient bound G must be positive");
  }
  return (std::sqrt(power) / spec.grad_bound) * gradient;
}

Eigen::VectorXd transmit(const Eigen::VectorXd& encoded,
                         const ChannelSpec& spec, std::uint64_t seed) {
  if (static_cast<std::size_t>(encoded.size()) != spec.dim) {
    throw InvalidInputError("signal dimension does not match the channel");
  }
  const NoiseGenerator noise(spec);
  return encoded + noise.draw(seed);
}

Eigen::VectorXd decode(const Eigen::VectorXd& received, double power,
                       const ChannelSpec& spec) {
  check_power(power);
  if (!(spec.grad_bound > 0.0)) {
    throw InvalidInputError("gradient bound G must be positive");
  }
  return (spec.grad_bound / std::sqrt(power)) * received;
}

Transmission send(const Eigen::VectorXd& gradient, double power,
                  const NoiseGenerator& noise, std::uint64_t seed) {
  const ChannelSpec& spec = noise.spec();
  if (static_cast<std::size_t>(gradient.size()) != spec.dim) {
    throw InvalidInputError("signal dimension does not match the channel");
  }
  Transmission tx;
  tx.sent = encode(gradient, power, spec);
  tx.received = tx.sent + noise.draw(seed);
  tx.power_used = power;
  tx.noise_seed = seed;
  return tx;
}

}  // namespace pagd
