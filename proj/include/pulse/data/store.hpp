#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "pulse/data/registry.hpp"
#include "pulse/data/segment.hpp"

namespace pulse::data {

inline constexpr int kStoreVersion = 1;

struct Vocabularies {
  Vocabulary user, sport, device, gender;

  static Vocabularies build(const std::vector<Segment>& segments);
  nlohmann::json to_json() const;
  static Vocabularies from_json(const nlohmann::json& j);
};

/// Canonical segment store: `manifest.json` plus `segments.jsonl`, one
/// segment per line.
struct SegmentStore {
  ChannelRegistry registry;
  std::vector<Segment> segments;
  /// Free-form provenance recorded in the manifest (generator config, ...).
  nlohmann::json info = nlohmann::json::object();

  /// Sorts by (user, start time, session, window index).
  void sort();
  Vocabularies vocabularies() const { return Vocabularies::build(segments); }

  void save(const std::filesystem::path& dir) const;
  static SegmentStore load(const std::filesystem::path& dir);
};

std::string format_double(double v);
std::string segment_to_line(const Segment& s);
Segment segment_from_json(const nlohmann::json& j, std::size_t dims);

}  // namespace pulse::data
