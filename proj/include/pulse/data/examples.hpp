#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/data/registry.hpp"
#include "pulse/data/segment.hpp"

namespace pulse::data {

inline constexpr std::size_t kDefaultHistoryDepth = 10;

enum class GroupMode { user, sport, user_sport };
GroupMode parse_group_mode(const std::string& s);
std::string to_string(GroupMode m);
std::string group_key(const Segment& s, GroupMode mode);

/// A target segment with the user's preceding segments. Indices point into
/// the segment list the example was built from.
struct Example {
  std::size_t current = 0;
  std::vector<std::size_t> history;  // chronological, oldest first
  std::vector<double> history_gaps;  // gap preceding each history segment, seconds
  double gap = 0.0;                  // gap preceding the current segment
  int group = 0;
};

/// Segment indices of every user in chronological order.
std::map<std::string, std::vector<std::size_t>> user_timelines(const std::vector<Segment>& segments);

/// Seconds between the end of the previous timeline entry and the start of
/// entry `pos`; 0 for the first entry and for overlaps.
double gap_before(const std::vector<Segment>& segments, const std::vector<std::size_t>& timeline,
                  std::size_t pos);

Example build_example(const std::vector<Segment>& segments, const std::vector<std::size_t>& timeline,
                      std::size_t pos, std::size_t max_history = kDefaultHistoryDepth);

struct ExampleSet {
  std::vector<Example> examples;  // one per segment, in segment order
  Vocabulary groups;
};

ExampleSet build_examples(const std::vector<Segment>& segments, std::size_t max_history, GroupMode mode);

struct Split {
  std::vector<std::size_t> train, val, test;
};

/// Largest-remainder allocation of n items to the three ratios.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

/// Seeded shuffle of 0..n-1 cut into train/val/test.
Split split_corpus(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed);

/// Same, but items sharing a key always land in the same part; the ratios
/// apply to the distinct keys.
Split split_corpus_grouped(const std::vector<std::string>& keys, const std::array<double, 3>& ratios,
                           std::uint64_t seed);

/// Per-channel z-scoring from observed entries of a set of segments. Zero
/// filled (unobserved) entries stay exactly zero.
struct Normalizer {
  std::vector<double> mean, scale;
  double hr_mean = 0.0, hr_scale = 1.0;

  static Normalizer fit(const std::vector<Segment>& segments, const std::vector<std::size_t>& indices);
  /// Time-major T x D matrix of normalised channels.
  std::vector<double> features(const Segment& s) const;
  std::vector<double> hr(const Segment& s) const;
  double denormalize_hr(double z) const { return z * hr_scale + hr_mean; }

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);
};

}  // namespace pulse::data
