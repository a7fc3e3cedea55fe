#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pulse::data {

inline constexpr double kHrMin = 20.0;
inline constexpr double kHrMax = 250.0;
inline constexpr std::size_t kDefaultWindow = 450;

/// A whole workout on the canonical 1 s grid. Channel rows are zero where
/// the channel is unobserved.
struct Session {
  std::string user_id;
  std::string session_id;
  std::string sport;
  std::string device;
  std::string gender;  // empty when unknown
  double start_time_unix_s = 0.0;
  std::size_t length = 0;
  std::vector<std::uint8_t> observed;  // D
  std::vector<double> channels;        // D x length, row-major
  std::vector<double> hr;              // length

  std::size_t dims() const { return observed.size(); }
  double end_time_unix_s() const { return start_time_unix_s + static_cast<double>(length); }
};

/// One fixed-length window of a session.
struct Segment {
  std::string user_id;
  std::string session_id;
  std::size_t segment_index = 0;
  std::string sport;
  std::string device;
  std::string gender;
  double start_time_unix_s = 0.0;  // start of this window
  double dt_s = 1.0;
  std::vector<std::uint8_t> observed;  // D
  std::vector<double> channels;        // D x T
  std::vector<double> hr;              // T
  std::size_t hr_clipped = 0;          // samples moved into [20, 250]

  std::size_t dims() const { return observed.size(); }
  std::size_t length() const { return hr.size(); }
  double end_time_unix_s() const { return start_time_unix_s + dt_s * static_cast<double>(length()); }
  double channel(std::size_t d, std::size_t t) const { return channels[d * length() + t]; }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Non-overlapping windows of length `window`; a trailing remainder is
/// dropped. Heart rate outside [20, 250] is clipped and counted.
std::vector<Segment> window_session(const Session& session, std::size_t window = kDefaultWindow);

}  // namespace pulse::data
