#include "pulse/featdrop/featdrop.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pulse::featdrop {

void DropoutConfig::validate(std::size_t dims) const {
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max))
    throw std::invalid_argument("dropout: need 0 <= p_min <= p_max <= 1");
  if (!(epochs > 0.0)) throw std::invalid_argument("dropout: curriculum length must be positive");
  if (min_keep < 1 || min_keep > dims) throw std::invalid_argument("dropout: min_keep must lie in [1, D]");
  if (main.size() > dims) throw std::invalid_argument("dropout: more main channels than channels");
  for (auto m : main)
    if (m >= dims) throw std::invalid_argument("dropout: main channel index " + std::to_string(m) + " out of range");
}

double dropout_prob(double epoch, const DropoutConfig& c) {
  if (epoch < 0.0) throw std::invalid_argument("dropout: negative epoch");
  return c.p_min + (c.p_max - c.p_min) * std::min(epoch / c.epochs, 1.0);
}

std::size_t FeatureMask::kept() const {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{1}));
}

FeatureMask sample_mask(const std::vector<std::uint8_t>& observed, double p, const DropoutConfig& config, Rng& rng) {
  const std::size_t D = observed.size();
  FeatureMask m;
  m.keep.assign(D, 0);
  std::vector<std::size_t> dropped;
  std::size_t observed_count = 0;
  for (std::size_t d = 0; d < D; ++d) {
    if (!observed[d]) continue;
    ++observed_count;
    const bool is_main = std::find(config.main.begin(), config.main.end(), d) != config.main.end();
    // One draw per observed channel keeps the stream layout independent of the main set.
    const bool drop = uniform01(rng) < p;
    if (is_main || !drop) {
      m.keep[d] = 1;
    } else {
      dropped.push_back(d);
    }
  }
  if (observed_count < config.min_keep) {
    for (std::size_t d = 0; d < D; ++d) m.keep[d] = observed[d];
    m.flagged = true;
    return m;
  }
  std::size_t kept = m.kept();
  while (kept < config.min_keep) {
    const auto pick = std::uniform_int_distribution<std::size_t>(0, dropped.size() - 1)(rng);
    m.keep[dropped[pick]] = 1;
    dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(pick));
    ++kept;
  }
  return m;
}

void apply_mask(std::span<double> channels, std::size_t length, const FeatureMask& mask) {
  if (channels.size() != mask.keep.size() * length) throw std::invalid_argument("apply_mask: shape mismatch");
  for (std::size_t d = 0; d < mask.keep.size(); ++d)
    if (!mask.keep[d]) std::fill_n(channels.begin() + d * length, length, 0.0);
}

void apply_mask_time_major(std::span<double> features, std::size_t length, const FeatureMask& mask) {
  const std::size_t D = mask.keep.size();
  if (features.size() != D * length) throw std::invalid_argument("apply_mask: shape mismatch");
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t d = 0; d < D; ++d)
      if (!mask.keep[d]) features[t * D + d] = 0.0;
}

}  // namespace pulse::featdrop
