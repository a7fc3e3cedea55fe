#pragma once

#include <cstddef>
#include <vector>

namespace pulse::ingest {

/// Linear interpolation onto t0, t0 + period, ... <= t_end.
/// Throws std::invalid_argument on fewer than two samples or on timestamps
/// that are not strictly increasing.
std::vector<double> resample_uniform(const std::vector<double>& timestamps, const std::vector<double>& values,
                                     double period = 1.0);

struct DerivedSpeed {
  std::vector<double> speed;
  std::size_t clamped = 0;  // negative distance increments set to 0
};

/// Forward difference of cumulative distance over `dt`; the first value
/// copies the second.
DerivedSpeed derive_speed(const std::vector<double>& distance, double dt = 1.0);

}  // namespace pulse::ingest
