#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/data/registry.hpp"
#include "pulse/data/segment.hpp"
#include "pulse/data/store.hpp"

namespace pulse::ingest {

inline constexpr const char* kHeartRate = "heart_rate";

struct ColumnMap {
  std::string raw;      // column header in the export
  std::string unit;     // unit of the raw values
  std::string channel;  // canonical channel, or "heart_rate" for the target
};

/// How one vendor's tabular export maps onto the canonical channels.
struct VendorSchema {
  std::string vendor;
  double sampling_period_s = 1.0;
  std::string timestamp_column = "timestamp";
  std::vector<ColumnMap> columns;
  /// Sources for the canonical speed row, best first: "enhanced", "raw", "derived".
  std::vector<std::string> speed_precedence{"enhanced", "raw", "derived"};

  /// Throws when a mapped channel is missing from `registry`, a unit cannot
  /// be converted, or the period is not positive.
  void validate(const data::ChannelRegistry& registry) const;

  nlohmann::json to_json() const;
  static VendorSchema from_json(const nlohmann::json& j);
  static VendorSchema load(const std::filesystem::path& path);
};

/// One exported file: metadata plus named float columns sharing timestamps.
/// Empty cells are NaN.
struct RawSession {
  std::string vendor;
  std::string user_id;
  std::string session_id;
  std::string sport;
  std::string gender;
  std::vector<double> timestamps;
  std::map<std::string, std::vector<double>> columns;
};

/// Reads a delimited export. Lines starting with '#' carry metadata as
/// `key=value` (user_id, sport, gender, session_id). The delimiter is
/// detected from the header row (',', ';' or tab).
RawSession read_raw_session(const std::filesystem::path& path, const std::string& timestamp_column);

struct NormalizeReport {
  std::vector<std::string> warnings;
  std::string speed_source;  // which source filled the canonical speed row
  std::size_t gap_splits = 0;
  std::size_t clamped_distance = 0;
};

/// Aliases, converts and resamples a raw session onto the 1 s grid.
/// Timestamp gaps above `max_gap_s` split the session. Unobserved channels
/// are zero-filled. Throws when there is no heart-rate column.
std::vector<data::Session> normalize_session(const RawSession& raw, const VendorSchema& schema,
                                             const data::ChannelRegistry& registry,
                                             NormalizeReport* report = nullptr, double max_gap_s = 30.0);

struct IngestReport {
  std::size_t files = 0;
  std::size_t failed_files = 0;
  std::size_t sessions = 0;
  std::size_t segments = 0;
  std::size_t dropped_samples = 0;  // window remainders and too-short pieces
  std::map<std::string, std::size_t> segments_per_sport;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;

  nlohmann::json to_json() const;
};

struct IngestResult {
  data::SegmentStore store;
  IngestReport report;
  bool ok() const { return report.errors.empty(); }
};

/// Ingests every regular file of `dir` (sorted by name) with one schema.
IngestResult ingest_directory(const std::filesystem::path& dir, const VendorSchema& schema,
                              const data::ChannelRegistry& registry, std::size_t window = data::kDefaultWindow);

}  // namespace pulse::ingest
