#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pulse/util/rng.hpp"

namespace pulse::featdrop {

struct DropoutConfig {
  double p_min = 0.1;
  double p_max = 0.5;
  double epochs = 20.0;       // curriculum length E
  std::size_t min_keep = 2;   // K
  std::vector<std::size_t> main;

  /// Throws std::invalid_argument when a field is out of range for D channels.
  void validate(std::size_t dims) const;
};

/// p(e) = p_min + (p_max - p_min) * min(e / E, 1)
double dropout_prob(double epoch, const DropoutConfig& config);

struct FeatureMask {
  std::vector<std::uint8_t> keep;  // D
  bool flagged = false;            // fewer than K channels were observed
  std::size_t kept() const;
};

/// Drops each observed non-main channel with probability p, then reinstates
/// uniformly chosen dropped channels until at least K observed channels
/// remain. Unobserved channels are 0 in the mask and never count toward K.
FeatureMask sample_mask(const std::vector<std::uint8_t>& observed, double p, const DropoutConfig& config, Rng& rng);

/// Zeroes channel rows of a D x T (channel-major) matrix where keep is 0.
void apply_mask(std::span<double> channels, std::size_t length, const FeatureMask& mask);
/// Same for a T x D (time-major) matrix.
void apply_mask_time_major(std::span<double> features, std::size_t length, const FeatureMask& mask);

}  // namespace pulse::featdrop
