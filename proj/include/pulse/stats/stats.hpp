#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pulse::stats {

struct Bootstrap {
  double mean = 0.0;
  double std = 0.0;  // sample std of the replicate means
  std::vector<double> replicates;
};

/// Means of `iterations` resamples of ceil(fraction * n) values drawn with
/// replacement. Throws std::invalid_argument on empty input.
Bootstrap bootstrap(std::span<const double> values, std::size_t iterations = 200, double fraction = 0.8,
                    std::uint64_t seed = 0);

/// 100 * (baseline - ours) / baseline.
double improvement(double ours, double baseline);

struct Wilcoxon {
  double p = 1.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n = 0;  // nonzero differences
  bool exact = false;
  bool degenerate = false;  // every difference was zero
};

/// Signed-rank test of `differences` (ours - baseline) against the
/// alternative that they tend to be negative. Zeros are dropped and tied
/// magnitudes share average ranks. Exact enumeration up to `exact_limit`
/// nonzero differences, normal approximation with continuity correction
/// above. Throws when fewer than 3 nonzero differences remain (unless all
/// are zero, which reports p = 1 and sets `degenerate`).
Wilcoxon wilcoxon_one_sided(std::span<const double> differences, std::size_t exact_limit = 25);

struct Fdr {
  std::vector<double> adjusted;
  std::vector<bool> rejected;
};

/// Benjamini-Hochberg step-up adjustment; adjusted values keep input order.
Fdr bh_fdr(std::span<const double> p, double q = 0.05);

/// Models x blocks table of error values (lower is better).
struct MetricTable {
  std::vector<std::string> models;
  std::vector<std::string> blocks;
  std::vector<std::vector<double>> values;  // [block][model]
  /// Strict orders for printed ties: {block, better model, worse model}.
  struct Order {
    std::size_t block, better, worse;
  };
  std::vector<Order> orders;

  std::size_t model(const std::string& name) const;
  std::vector<double> column(std::size_t model) const;
};

/// Within-block ranks (1 = lowest). Ties share the average rank unless an
/// order entry separates them.
std::vector<double> block_ranks(const MetricTable& table, std::size_t block);

struct Friedman {
  std::vector<double> average_ranks;  // per model
  double statistic = 0.0;
  double p = 1.0;
  std::size_t df = 0;
};

/// Friedman chi-square over average within-block ranks, k - 1 degrees of freedom.
Friedman friedman(const MetricTable& table);

/// (mean(ours) - mean(baseline)) / pooled sd, with sample variances.
double cohens_d(std::span<const double> ours, std::span<const double> baseline);

struct WinDrawLoss {
  std::size_t wins = 0, draws = 0, losses = 0;
};

/// Per block: win when ours is strictly lower, draw on exact ties not
/// separated by an order entry.
WinDrawLoss wdl(const MetricTable& table, std::size_t ours, std::size_t baseline);

/// Mean silhouette with cosine distance; rows of `points` are n x dim.
/// Throws unless there are at least two distinct labels.
double silhouette(std::span<const double> points, std::size_t dim, const std::vector<int>& labels);

}  // namespace pulse::stats
