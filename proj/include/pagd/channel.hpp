#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace pagd {

/// Radial law of the channel noise. All three give a zero-mean vector with
/// E||n||^2 = noise_power and ||n|| <= noise_bound almost surely.
enum class NoiseModel {
  kTwoPointRadius,     // radius in {sqrt(P/2), Delta}, uniform direction
  kFixedRadius,        // radius sqrt(P), uniform direction
  kTruncatedGaussian,  // isotropic Gaussian conditioned on ||n|| <= Delta
};

std::string_view to_string(NoiseModel model);
NoiseModel parse_noise_model(std::string_view name);

struct ChannelSpec {
  double noise_power = 0.0;  // sigma_N^2 = E||n||^2
  double noise_bound = 1.0;  // Delta
  double grad_bound = 1.0;   // G, encoder normalization
  std::size_t dim = 1;
  NoiseModel model = NoiseModel::kTwoPointRadius;

  /// Throws InvalidInputError unless noise_bound^2 >= noise_power >= 0,
  /// noise_bound > 0, grad_bound > 0 and dim > 0.
  void validate() const;
};

/// splitmix64 of (root, index); used for per-replica and per-iteration seeds.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Calibrated noise sampler for one ChannelSpec. Calibration (the truncated
/// Gaussian scale in particular) happens once at construction.
class NoiseGenerator {
 public:
  explicit NoiseGenerator(const ChannelSpec& spec);

  Eigen::VectorXd draw(std::mt19937_64& rng) const;
  Eigen::VectorXd draw(std::uint64_t seed) const;

  const ChannelSpec& spec() const { return spec_; }
  /// Per-coordinate standard deviation of the truncated Gaussian before
  /// conditioning; 0 for the other models.
  double gaussian_scale() const { return gaussian_scale_; }

 private:
  Eigen::VectorXd unit_direction(std::mt19937_64& rng) const;

  ChannelSpec spec_;
  double low_radius_ = 0.0;
  double high_probability_ = 0.0;
  double gaussian_scale_ = 0.0;
};

struct Transmission {
  Eigen::VectorXd sent;
  Eigen::VectorXd received;
  double power_used = 0.0;
  std::uint64_t noise_seed = 0;
};

/// sqrt(power) * gradient / G
Eigen::VectorXd encode(const Eigen::VectorXd& gradient, double power,
                       const ChannelSpec& spec);

/// encoded + n, with n drawn from the channel's noise law under `seed`.
Eigen::VectorXd transmit(const Eigen::VectorXd& encoded,
                         const ChannelSpec& spec, std::uint64_t seed);

/// G * received / sqrt(power)
Eigen::VectorXd decode(const Eigen::VectorXd& received, double power,
                       const ChannelSpec& spec);

/// encode + transmit through an already calibrated generator.
Transmission send(const Eigen::VectorXd& gradient, double power,
                  const NoiseGenerator& noise, std::uint64_t seed);

}  // namespace pagd
