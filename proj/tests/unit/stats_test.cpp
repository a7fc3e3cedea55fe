#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulse/stats/fixtures.hpp"
#include "pulse/stats/report.hpp"
#include "pulse/util/rng.hpp"

using namespace pulse;
using namespace pulse::stats;

namespace {

const std::filesystem::path kTables = std::filesystem::path(PULSE_SOURCE_DIR) / "tables";

}  // namespace

TEST(Bootstrap, ConstantInput) {
  std::vector<double> v(50, 3.5);
  auto b = bootstrap(v, 200, 0.8, 1);
  EXPECT_EQ(b.mean, 3.5);
  EXPECT_EQ(b.std, 0.0);
  EXPECT_EQ(b.replicates.size(), 200u);
}

TEST(Bootstrap, DeterministicAndCentred) {
  Rng rng(9);
  std::vector<double> v(400);
  for (auto& x : v) x = normal(rng, 10.0, 3.0);
  auto a = bootstrap(v, 200, 0.8, 5), b = bootstrap(v, 200, 0.8, 5);
  EXPECT_EQ(a.replicates, b.replicates);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  // Standard error of the mean of 200 replicate means.
  const double se = a.std / std::sqrt(200.0);
  EXPECT_LE(std::abs(a.mean - mean), 2.0 * se);
  EXPECT_THROW(bootstrap(std::vector<double>{}), std::invalid_argument);
}

TEST(Improvement, WorkedCases) {
  EXPECT_NEAR(improvement(204.63, 248.02), 17.49, 0.005);
  EXPECT_NEAR(improvement(204.63, 570.94), 64.16, 0.005);
  EXPECT_EQ(improvement(5.0, 5.0), 0.0);
  EXPECT_THROW(improvement(1.0, 0.0), std::invalid_argument);
}

TEST(Wilcoxon, ExactSmallCase) {
  std::vector<double> d{-3, -1, -2};
  auto w = wilcoxon_one_sided(d);
  EXPECT_EQ(w.w_plus, 0.0);
  EXPECT_TRUE(w.exact);
  EXPECT_DOUBLE_EQ(w.p, 0.125);
}

TEST(Wilcoxon, WrongDirectionAndDegenerate) {
  std::vector<double> pos{1, 2, 3, 4, 5};
  EXPECT_GE(wilcoxon_one_sided(pos).p, 0.5);
  std::vector<double> zero{0, 0, 0, 0};
  auto w = wilcoxon_one_sided(zero);
  EXPECT_TRUE(w.degenerate);
  EXPECT_EQ(w.p, 1.0);
  std::vector<double> two{1, -1, 0};
  EXPECT_THROW(wilcoxon_one_sided(two), std::invalid_argument);
}

TEST(Wilcoxon, ExactMatchesEnumerationWithTies) {
  std::vector<double> d{-1, 1, -2, -2, 3, -4};
  auto w = wilcoxon_one_sided(d);
  // Brute force over all sign assignments of the same magnitudes.
  std::vector<double> mag{1, 1, 2, 2, 3, 4}, rank{1.5, 1.5, 3.5, 3.5, 5, 6};
  std::size_t hit = 0;
  for (unsigned m = 0; m < 64; ++m) {
    double wp = 0.0;
    for (int i = 0; i < 6; ++i)
      if (m >> i & 1) wp += rank[i];
    hit += wp <= w.w_plus;
  }
  EXPECT_EQ(w.w_plus, 6.5);
  EXPECT_DOUBLE_EQ(w.p, hit / 64.0);
}

TEST(Wilcoxon, ExactAndNormalAgreeAtTwentyFive) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> d(25);
    for (auto& x : d) x = normal(rng);
    const double exact = wilcoxon_one_sided(d, 25).p;
    const double approx = wilcoxon_one_sided(d, 0).p;
    EXPECT_LE(std::abs(exact - approx) / exact, 0.10) << exact << " " << approx;
  }
}

TEST(Fdr, StepUp) {
  std::vector<double> p{0.01, 0.02, 0.04};
  auto r = bh_fdr(p);
  EXPECT_NEAR(r.adjusted[0], 0.03, 1e-15);
  EXPECT_NEAR(r.adjusted[1], 0.03, 1e-15);
  EXPECT_NEAR(r.adjusted[2], 0.04, 1e-15);
  EXPECT_TRUE(r.rejected[0] && r.rejected[1] && r.rejected[2]);
  std::vector<double> one{0.2};
  EXPECT_EQ(bh_fdr(one).adjusted[0], 0.2);
}

TEST(Fdr, NeverBelowRawNeverAboveOneMonotone) {
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(1 + rep % 12);
    for (auto& x : p) x = uniform01(rng);
    auto r = bh_fdr(p);
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(r.adjusted[i], p[i]);
      EXPECT_LE(r.adjusted[i], 1.0);
      if (i > 0) {
        EXPECT_LE(r.adjusted[idx[i - 1]], r.adjusted[idx[i]]);
      }
    }
  }
}

TEST(Friedman, IdenticalColumnsAndRankSums) {
  MetricTable t;
  t.models = {"a", "b", "c"};
  t.blocks = {"x", "y"};
  t.values = {{1, 1, 1}, {2, 2, 2}};
  auto f = friedman(t);
  EXPECT_EQ(f.statistic, 0.0);
  EXPECT_EQ(f.p, 1.0);
  for (double r : f.average_ranks) EXPECT_EQ(r, 2.0);
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    MetricTable u;
    u.models = {"a", "b", "c", "d"};
    for (int b = 0; b < 6; ++b) {
      u.blocks.push_back(std::to_string(b));
      std::vector<double> row;
      for (int m = 0; m < 4; ++m) row.push_back(std::floor(uniform(rng, 0, 4)));
      u.values.push_back(row);
      auto r = block_ranks(u, b);
      EXPECT_DOUBLE_EQ(std::accumulate(r.begin(), r.end(), 0.0), 10.0);
    }
    auto g = friedman(u);
    EXPECT_NEAR(std::accumulate(g.average_ranks.begin(), g.average_ranks.end(), 0.0) / 4.0, 2.5, 1e-12);
  }
}

TEST(Friedman, OrderEntrySplitsPrintedTie) {
  MetricTable t;
  t.models = {"a", "b", "c"};
  t.blocks = {"x"};
  t.values = {{1, 1, 2}};
  EXPECT_EQ(block_ranks(t, 0), (std::vector<double>{1.5, 1.5, 3}));
  t.orders.push_back({0, 1, 0});
  EXPECT_EQ(block_ranks(t, 0), (std::vector<double>{2, 1, 3}));
  auto w = wdl(t, 0, 1);
  EXPECT_EQ(w.losses, 1u);
  EXPECT_EQ(w.draws, 0u);
}

TEST(CohensD, WorkedCases) {
  std::vector<double> a{1, 2, 3}, zero{0}, base{1, 3};
  EXPECT_EQ(cohens_d(a, a), 0.0);
  EXPECT_NEAR(cohens_d(zero, base), -2.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cohens_d(base, zero), 2.0 / std::sqrt(2.0), 1e-12);
}

TEST(Wdl, SelfComparisonAllDraws) {
  auto fx = load_per_sport(kTables / "table4_fitrec_per_sport.tsv");
  const auto& t = fx.metrics.at("MSE");
  auto w = wdl(t, 8, 8);
  EXPECT_EQ(w.wins, 0u);
  EXPECT_EQ(w.draws, 25u);
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    auto r = wdl(t, t.model("Ours"), m);
    EXPECT_EQ(r.wins + r.draws + r.losses, t.blocks.size());
  }
}

TEST(Fixtures, PerSportShapes) {
  auto f = load_per_sport(kTables / "table4_fitrec_per_sport.tsv");
  EXPECT_NE(f.source.find("Table 4"), std::string::npos);
  EXPECT_EQ(f.metrics.at("MSE").blocks.size(), 25u);
  EXPECT_EQ(f.metrics.at("MAE").models.size(), 9u);
  EXPECT_EQ(f.metrics.at("MAE").orders.size(), 2u);
  auto p = load_per_sport(kTables / "table5_parrotao_per_sport.tsv");
  EXPECT_EQ(p.metrics.at("MSE").blocks.size(), 13u);
  auto o = load_overall(kTables / "table2_overall.tsv");
  EXPECT_EQ(o.entries.size(), 36u);
  EXPECT_EQ(o.at("Ours", "FitRec", "MSE").mean, 204.63);
  EXPECT_THROW(load_per_sport(kTables / "missing.tsv"), std::runtime_error);
}

TEST(Silhouette, SeparatedAndShuffled) {
  Rng rng(6);
  std::vector<double> pts;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    pts.push_back(c == 0 ? 1.0 : 0.01 * normal(rng));
    pts.push_back(c == 0 ? 0.01 * normal(rng) : 1.0);
    labels.push_back(c);
  }
  EXPECT_GT(silhouette(pts, 2, labels), 0.95);
  std::vector<double> noise;
  for (int i = 0; i < 400; ++i) noise.push_back(normal(rng));
  std::vector<int> shuffled;
  for (int i = 0; i < 100; ++i) shuffled.push_back(static_cast<int>(uniform01(rng) * 3));
  EXPECT_LT(std::abs(silhouette(noise, 4, shuffled)), 0.1);
  std::vector<int> single(40, 0);
  EXPECT_THROW(silhouette(pts, 2, single), std::invalid_argument);
}

TEST(Report, RendersAllSections) {
  auto rep = reproduce(kTables);
  EXPECT_EQ(rep.improvements.size(), 32u);
  EXPECT_EQ(rep.rankings.size(), 4u);
  EXPECT_EQ(rep.pairwise.size(), 32u);
  const auto text = rep.render();
  for (const char* s : {"# pulse-stats-report 1", "[improvement]", "[friedman]", "[pairwise]"})
    EXPECT_NE(text.find(s), std::string::npos) << s;
  for (const auto& p : rep.pairwise) EXPECT_GE(p.p_adjusted, p.test.p);
}
