#include "pulse/data/examples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "pulse/util/rng.hpp"

namespace pulse::data {

GroupMode parse_group_mode(const std::string& s) {
  if (s == "user") return GroupMode::user;
  if (s == "sport") return GroupMode::sport;
  if (s == "user_sport") return GroupMode::user_sport;
  throw std::invalid_argument("unknown grouping '" + s + "' (expected user, sport or user_sport)");
}

std::string to_string(GroupMode m) {
  switch (m) {
    case GroupMode::user: return "user";
    case GroupMode::sport: return "sport";
    case GroupMode::user_sport: return "user_sport";
  }
  return "?";
}

std::string group_key(const Segment& s, GroupMode mode) {
  switch (mode) {
    case GroupMode::user: return s.user_id;
    case GroupMode::sport: return s.sport;
    case GroupMode::user_sport: return s.user_id + "\x1f" + s.sport;
  }
  return {};
}

std::map<std::string, std::vector<std::size_t>> user_timelines(const std::vector<Segment>& segments) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < segments.size(); ++i) out[segments[i].user_id].push_back(i);
  for (auto& [user, idx] : out)
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = segments[a];
      const auto& y = segments[b];
      return std::tie(x.start_time_unix_s, x.session_id, x.segment_index) <
             std::tie(y.start_time_unix_s, y.session_id, y.segment_index);
    });
  return out;
}

double gap_before(const std::vector<Segment>& segments, const std::vector<std::size_t>& timeline,
                  std::size_t pos) {
  if (pos == 0) return 0.0;
  const double g = segments[timeline[pos]].start_time_unix_s - segments[timeline[pos - 1]].end_time_unix_s();
  return std::max(0.0, g);
}

Example build_example(const std::vector<Segment>& segments, const std::vector<std::size_t>& timeline,
                      std::size_t pos, std::size_t max_history) {
  if (pos >= timeline.size()) throw std::out_of_range("build_example: position past end of timeline");
  Example ex;
  ex.current = timeline[pos];
  ex.gap = gap_before(segments, timeline, pos);
  const std::size_t first = pos > max_history ? pos - max_history : 0;
  for (std::size_t p = first; p < pos; ++p) {
    ex.history.push_back(timeline[p]);
    ex.history_gaps.push_back(gap_before(segments, timeline, p));
  }
  return ex;
}

ExampleSet build_examples(const std::vector<Segment>& segments, std::size_t max_history, GroupMode mode) {
  ExampleSet set;
  set.examples.resize(segments.size());
  for (const auto& [user, timeline] : user_timelines(segments))
    for (std::size_t p = 0; p < timeline.size(); ++p)
      set.examples[timeline[p]] = build_example(segments, timeline, p, max_history);
  for (std::size_t i = 0; i < segments.size(); ++i)
    set.examples[i].group = static_cast<int>(set.groups.add(group_key(segments[i], mode)));
  return set;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split ratios must be nonnegative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = ratios[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % 3]];
  return sizes;
}

Split split_corpus(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(n, ratios);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {0x73706c6974}));
  std::shuffle(idx.begin(), idx.end(), rng);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + sizes[0]);
  s.val.assign(idx.begin() + sizes[0], idx.begin() + sizes[0] + sizes[1]);
  s.test.assign(idx.begin() + sizes[0] + sizes[1], idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

Split split_corpus_grouped(const std::vector<std::string>& keys, const std::array<double, 3>& ratios,
                           std::uint64_t seed) {
  Vocabulary distinct;
  std::vector<std::size_t> key_of(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) key_of[i] = distinct.add(keys[i]);
  const Split by_key = split_corpus(distinct.size(), ratios, seed);
  std::vector<int> part(distinct.size());
  for (auto k : by_key.train) part[k] = 0;
  for (auto k : by_key.val) part[k] = 1;
  for (auto k : by_key.test) part[k] = 2;
  Split s;
  for (std::size_t i = 0; i < keys.size(); ++i) (part[key_of[i]] == 0 ? s.train : part[key_of[i]] == 1 ? s.val : s.test).push_back(i);
  return s;
}

Normalizer Normalizer::fit(const std::vector<Segment>& segments, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("normaliser: no segments to fit");
  const std::size_t D = segments[indices.front()].dims();
  std::vector<double> sum(D, 0.0), sq(D, 0.0), cnt(D, 0.0);
  double hs = 0.0, hq = 0.0, hn = 0.0;
  for (auto i : indices) {
    const auto& s = segments[i];
    const std::size_t T = s.length();
    for (std::size_t d = 0; d < D; ++d) {
      if (!s.observed[d]) continue;
      for (std::size_t t = 0; t < T; ++t) {
        const double v = s.channels[d * T + t];
        sum[d] += v, sq[d] += v * v;
      }
      cnt[d] += static_cast<double>(T);
    }
    for (double v : s.hr) hs += v, hq += v * v, hn += 1.0;
  }
  Normalizer n;
  n.mean.assign(D, 0.0);
  n.scale.assign(D, 1.0);
  for (std::size_t d = 0; d < D; ++d) {
    if (cnt[d] == 0.0) continue;
    n.mean[d] = sum[d] / cnt[d];
    const double var = sq[d] / cnt[d] - n.mean[d] * n.mean[d];
    n.scale[d] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  n.hr_mean = hs / hn;
  const double hv = hq / hn - n.hr_mean * n.hr_mean;
  n.hr_scale = hv > 1e-12 ? std::sqrt(hv) : 1.0;
  return n;
}

std::vector<double> Normalizer::features(const Segment& s) const {
  const std::size_t D = s.dims(), T = s.length();
  if (D != mean.size()) throw std::invalid_argument("normaliser: channel count mismatch");
  std::vector<double> out(T * D, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    if (!s.observed[d]) continue;
    for (std::size_t t = 0; t < T; ++t) out[t * D + d] = (s.channels[d * T + t] - mean[d]) / scale[d];
  }
  return out;
}

std::vector<double> Normalizer::hr(const Segment& s) const {
  std::vector<double> out(s.hr.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = (s.hr[t] - hr_mean) / hr_scale;
  return out;
}

nlohmann::json Normalizer::to_json() const {
  return {{"mean", mean}, {"scale", scale}, {"hr_mean", hr_mean}, {"hr_scale", hr_scale}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  Normalizer n;
  n.mean = j.at("mean").get<std::vector<double>>();
  n.scale = j.at("scale").get<std::vector<double>>();
  n.hr_mean = j.at("hr_mean").get<double>();
  n.hr_scale = j.at("hr_scale").get<double>();
  return n;
}

}  // namespace pulse::data
