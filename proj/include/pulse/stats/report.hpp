#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/stats/fixtures.hpp"

namespace pulse::stats {

inline constexpr int kReportVersion = 1;

/// Relative improvements, Friedman ranks and pairwise signed-rank tests of
/// the "Ours" column against every other model, computed from the shipped
/// result fixtures.
struct ReproductionReport {
  struct Improvement {
    std::string dataset, metric, baseline;
    double percent = 0.0;
  };
  struct Ranking {
    std::string dataset, metric;
    std::vector<std::string> models;
    Friedman result;
  };
  struct Pairwise {
    std::string dataset, metric, baseline;
    Wilcoxon test;
    double p_adjusted = 1.0;
    WinDrawLoss wdl;
  };

  std::vector<Improvement> improvements;
  std::vector<Ranking> rankings;
  std::vector<Pairwise> pairwise;

  const Improvement& improvement(const std::string& dataset, const std::string& metric,
                                 const std::string& baseline) const;
  const Ranking& ranking(const std::string& dataset, const std::string& metric) const;
  const Pairwise& pair(const std::string& dataset, const std::string& metric, const std::string& baseline) const;

  /// Text with a version header and one tab-separated section per analysis.
  std::string render() const;
  nlohmann::json to_json() const;
};

/// Reads table2_overall.tsv, table4_fitrec_per_sport.tsv and
/// table5_parrotao_per_sport.tsv from `dir`.
ReproductionReport reproduce(const std::filesystem::path& dir, const std::string& ours = "Ours");

}  // namespace pulse::stats
