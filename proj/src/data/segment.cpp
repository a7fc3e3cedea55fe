#include "pulse/data/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pulse::data {

void Segment::validate() const {
  const std::size_t T = length(), D = dims();
  if (T == 0) throw std::invalid_argument("segment " + session_id + ": empty");
  if (channels.size() != D * T)
    throw std::invalid_argument("segment " + session_id + ": channel matrix is not D x T");
  for (double v : hr)
    if (!std::isfinite(v) || v < kHrMin || v > kHrMax)
      throw std::invalid_argument("segment " + session_id + ": heart rate outside [20, 250]");
  for (std::size_t d = 0; d < D; ++d) {
    if (observed[d]) continue;
    for (std::size_t t = 0; t < T; ++t)
      if (channels[d * T + t] != 0.0)
        throw std::invalid_argument("segment " + session_id + ": unobserved channel " + std::to_string(d) +
                                    " is not zero");
  }
}

std::vector<Segment> window_session(const Session& s, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window length must be positive");
  const std::size_t D = s.dims(), L = s.length;
  if (s.channels.size() != D * L || s.hr.size() != L)
    throw std::invalid_argument("session " + s.session_id + ": inconsistent lengths");
  std::vector<Segment> out;
  for (std::size_t k = 0; (k + 1) * window <= L; ++k) {
    Segment seg;
    seg.user_id = s.user_id;
    seg.session_id = s.session_id;
    seg.segment_index = k;
    seg.sport = s.sport;
    seg.device = s.device;
    seg.gender = s.gender;
    seg.start_time_unix_s = s.start_time_unix_s + static_cast<double>(k * window);
    seg.observed = s.observed;
    seg.channels.resize(D * window);
    for (std::size_t d = 0; d < D; ++d)
      std::copy_n(s.channels.begin() + d * L + k * window, window, seg.channels.begin() + d * window);
    seg.hr.assign(s.hr.begin() + k * window, s.hr.begin() + (k + 1) * window);
    for (auto& v : seg.hr) {
      const double c = std::clamp(std::isfinite(v) ? v : kHrMin, kHrMin, kHrMax);
      if (c != v) ++seg.hr_clipped;
      v = c;
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace pulse::data
