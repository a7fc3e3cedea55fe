#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pulse/stats/stats.hpp"

namespace pulse::stats {

/// Per-sport results: one MetricTable per metric ("MSE", "MAE").
struct PerSportFixture {
  std::string source;
  std::map<std::string, MetricTable> metrics;
};

/// Tab-separated: `sport n metric <model...>` header, '#' comments,
/// `# source: ...` and `# order: <sport>\t<metric>\t<better><<worse>`.
PerSportFixture load_per_sport(const std::filesystem::path& path);

struct OverallEntry {
  std::string model, dataset, metric;
  double mean = 0.0, std = 0.0;
};

struct OverallFixture {
  std::string source;
  std::vector<OverallEntry> entries;
  const OverallEntry& at(const std::string& model, const std::string& dataset, const std::string& metric) const;
  std::vector<std::string> models() const;
};

OverallFixture load_overall(const std::filesystem::path& path);

}  // namespace pulse::stats
