#include "pulse/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "pulse/util/rng.hpp"

namespace pulse::stats {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Average ranks (1-based) of `v`, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Bootstrap bootstrap(std::span<const double> values, std::size_t iterations, double fraction, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap: empty input");
  if (iterations == 0 || !(fraction > 0.0)) throw std::invalid_argument("bootstrap: bad iterations or fraction");
  const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(values.size())));
  Rng rng(derive_seed(seed, {0x626f6f74}));
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  Bootstrap b;
  b.replicates.reserve(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += values[pick(rng)];
    b.replicates.push_back(s / static_cast<double>(m));
  }
  b.mean = mean_of(b.replicates);
  b.std = std::sqrt(sample_var(b.replicates));
  return b;
}

double improvement(double ours, double baseline) {
  if (baseline == 0.0) throw std::invalid_argument("improvement: baseline is zero");
  return 100.0 * (baseline - ours) / baseline;
}

Wilcoxon wilcoxon_one_sided(std::span<const double> differences, std::size_t exact_limit) {
  std::vector<double> d;
  for (double x : differences) {
    if (!std::isfinite(x)) throw std::invalid_argument("wilcoxon: non-finite difference");
    if (x != 0.0) d.push_back(x);
  }
  Wilcoxon w;
  w.n = d.size();
  if (d.empty() && !differences.empty()) {
    w.degenerate = true;
    return w;
  }
  if (d.size() < 3) throw std::invalid_argument("wilcoxon: need at least 3 nonzero differences");
  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const auto ranks = average_ranks(mag);
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? w.w_plus : w.w_minus) += ranks[i];
  const std::size_t n = d.size();
  if (n <= exact_limit) {
    // Ranks are multiples of 1/2; count sign assignments by doubled rank sum.
    std::vector<long> doubled(n);
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) total += doubled[i] = std::lround(2.0 * ranks[i]);
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long r : doubled) {
      for (long s = reach; s >= 0; --s) count[s + r] += count[s];
      reach += r;
    }
    const long observed = std::lround(2.0 * w.w_plus);
    double tail = 0.0;
    for (long s = 0; s <= observed; ++s) tail += count[s];
    w.p = tail / std::ldexp(1.0, static_cast<int>(n));
    w.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    double ties = 0.0;
    std::map<double, std::size_t> groups;
    for (double r : ranks) ++groups[r];
    for (const auto& [r, t] : groups) ties += static_cast<double>(t * t * t - t);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double sd = std::sqrt(nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - ties / 48.0);
    w.p = normal_cdf((w.w_plus - mu + 0.5) / sd);
  }
  w.p = std::min(1.0, w.p);
  return w;
}

Fdr bh_fdr(std::span<const double> p, double q) {
  const std::size_t m = p.size();
  Fdr r;
  r.adjusted.assign(m, 0.0);
  r.rejected.assign(m, false);
  if (m == 0) return r;
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double v = p[idx[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running = std::min(running, v);
    r.adjusted[idx[k]] = std::clamp(running, p[idx[k]], 1.0);
  }
  for (std::size_t i = 0; i < m; ++i) r.rejected[i] = r.adjusted[i] <= q;
  return r;
}

std::size_t MetricTable::model(const std::string& name) const {
  auto it = std::find(models.begin(), models.end(), name);
  if (it == models.end()) throw std::out_of_range("metric table: no model '" + name + "'");
  return static_cast<std::size_t>(it - models.begin());
}

std::vector<double> MetricTable::column(std::size_t m) const {
  std::vector<double> c;
  for (const auto& row : values) c.push_back(row.at(m));
  return c;
}

std::vector<double> block_ranks(const MetricTable& t, std::size_t block) {
  auto r = average_ranks(t.values.at(block));
  for (const auto& o : t.orders) {
    if (o.block != block) continue;
    const double a = t.values[block][o.better], b = t.values[block][o.worse];
    if (a != b || r[o.better] != r[o.worse]) continue;
    std::size_t tied = 0;
    for (double v : t.values[block]) tied += v == a;
    if (tied != 2) throw std::invalid_argument("metric table: order entries only resolve two-way ties");
    r[o.better] -= 0.5;
    r[o.worse] += 0.5;
  }
  return r;
}

Friedman friedman(const MetricTable& t) {
  const std::size_t n = t.blocks.size(), k = t.models.size();
  if (n == 0 || k < 2) throw std::invalid_argument("friedman: need blocks and at least two models");
  Friedman f;
  f.average_ranks.assign(k, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    const auto r = block_ranks(t, b);
    for (std::size_t j = 0; j < k; ++j) f.average_ranks[j] += r[j];
  }
  double sq = 0.0;
  for (auto& r : f.average_ranks) {
    r /= static_cast<double>(n);
    sq += r * r;
  }
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  f.statistic = 12.0 * nn / (kk * (kk + 1.0)) * sq - 3.0 * nn * (kk + 1.0);
  if (f.statistic < 0.0 && f.statistic > -1e-9) f.statistic = 0.0;
  f.df = k - 1;
  boost::math::chi_squared dist(static_cast<double>(f.df));
  f.p = boost::math::cdf(boost::math::complement(dist, f.statistic));
  return f;
}

double cohens_d(std::span<const double> ours, std::span<const double> baseline) {
  if (ours.empty() || baseline.empty()) throw std::invalid_argument("cohens_d: empty input");
  const double n1 = static_cast<double>(ours.size()), n2 = static_cast<double>(baseline.size());
  const double diff = mean_of(ours) - mean_of(baseline);
  if (n1 + n2 <= 2.0) throw std::invalid_argument("cohens_d: need at least three values in total");
  const double pooled = std::sqrt(((n1 - 1.0) * sample_var(ours) + (n2 - 1.0) * sample_var(baseline)) / (n1 + n2 - 2.0));
  if (pooled == 0.0) {
    if (diff == 0.0) return 0.0;
    throw std::domain_error("cohens_d: zero pooled sd");
  }
  return diff / pooled;
}

WinDrawLoss wdl(const MetricTable& t, std::size_t ours, std::size_t baseline) {
  WinDrawLoss r;
  for (std::size_t b = 0; b < t.blocks.size(); ++b) {
    const double o = t.values[b].at(ours), x = t.values[b].at(baseline);
    if (ours == baseline || (o == x && [&] {
          for (const auto& ord : t.orders)
            if (ord.block == b && ((ord.better == ours && ord.worse == baseline) ||
                                   (ord.better == baseline && ord.worse == ours)))
              return false;
          return true;
        }())) {
      ++r.draws;
      continue;
    }
    bool win = o < x;
    if (o == x)
      for (const auto& ord : t.orders)
        if (ord.block == b && ord.better == ours && ord.worse == baseline) win = true;
    ++(win ? r.wins : r.losses);
  }
  return r;
}

double silhouette(std::span<const double> points, std::size_t dim, const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  if (dim == 0 || points.size() != n * dim) throw std::invalid_argument("silhouette: points are not n x dim");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw std::invalid_argument("silhouette: need at least two clusters");
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += points[i * dim + j] * points[i * dim + j];
    if (s == 0.0) throw std::domain_error("silhouette: zero vector has no cosine distance");
    norm[i] = std::sqrt(s);
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += points[a * dim + j] * points[b * dim + j];
    return 1.0 - s / (norm[a] * norm[b]);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[labels[j]] += dist(i, j);
    const std::size_t own = sizes[labels[i]];
    if (own == 1) continue;  // singleton clusters score 0
    const double a = sum[labels[i]] / static_cast<double>(own - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, size] : sizes)
      if (label != labels[i]) b = std::min(b, sum[label] / static_cast<double>(size));
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace pulse::stats
