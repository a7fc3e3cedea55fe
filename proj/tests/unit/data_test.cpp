#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "pulse/data/examples.hpp"
#include "pulse/data/store.hpp"
#include "pulse/synth/synth.hpp"

using namespace pulse;
using namespace pulse::data;

namespace {

Session session(std::size_t length, double start = 0.0, std::string user = "u1", std::string id = "s1") {
  Session s;
  s.user_id = std::move(user);
  s.session_id = std::move(id);
  s.sport = "run";
  s.device = "watch";
  s.start_time_unix_s = start;
  s.length = length;
  s.observed = {1, 0, 1};
  s.channels.assign(3 * length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    s.channels[t] = static_cast<double>(t);
    s.channels[2 * length + t] = 2.0 * static_cast<double>(t);
  }
  s.hr.assign(length, 120.0);
  return s;
}

Segment segment(const std::string& user, double start, std::size_t T = 4) {
  Segment s;
  s.user_id = user;
  s.session_id = user + "-" + std::to_string(static_cast<long>(start));
  s.sport = "run";
  s.device = "watch";
  s.start_time_unix_s = start;
  s.observed = {1, 0};
  s.channels.assign(2 * T, 0.0);
  s.hr.assign(T, 100.0);
  return s;
}

}  // namespace

TEST(Registry, StandardLayout) {
  auto r = ChannelRegistry::standard();
  EXPECT_EQ(r.size(), 32u);
  EXPECT_FALSE(r.find("heart_rate"));
  EXPECT_EQ(r.main_names(), (std::vector<std::string>{"speed", "altitude"}));
  EXPECT_TRUE(r.is_main(r.index("speed")));
  EXPECT_THROW(r.index("no_such_channel"), std::out_of_range);
  EXPECT_EQ(ChannelRegistry::from_json(r.to_json()), r);
  std::set<std::string> names;
  for (const auto& n : r.names()) EXPECT_TRUE(names.insert(n).second) << n;
}

TEST(Registry, DuplicateNameRejected) {
  EXPECT_THROW(ChannelRegistry({{"a", "m"}, {"a", "m"}}, {}), std::invalid_argument);
  EXPECT_THROW(ChannelRegistry({{"a", "m"}}, {"b"}), std::out_of_range);
}

TEST(Vocabulary, DenseIdsInInsertionOrder) {
  Vocabulary v;
  EXPECT_EQ(v.add("b"), 0u);
  EXPECT_EQ(v.add("a"), 1u);
  EXPECT_EQ(v.add("b"), 0u);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(Vocabulary::from_json(v.to_json()).tokens(), v.tokens());
  EXPECT_FALSE(v.find("c"));
}

TEST(Window, FloorOfLengthOverWindow) {
  auto segs = window_session(session(1000), 450);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[1].segment_index, 1u);
  EXPECT_EQ(segs[1].start_time_unix_s, 450.0);
  EXPECT_EQ(segs[1].channel(0, 0), 450.0);
  EXPECT_EQ(segs[1].channel(2, 449), 2.0 * 899.0);
  EXPECT_EQ(window_session(session(450), 450).size(), 1u);
  EXPECT_TRUE(window_session(session(449), 450).empty());
}

TEST(Window, HeartRateClippedAndCounted) {
  auto s = session(4);
  s.hr = {10.0, 120.0, 300.0, 250.0};
  auto segs = window_session(s, 4);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].hr, (std::vector<double>{20.0, 120.0, 250.0, 250.0}));
  EXPECT_EQ(segs[0].hr_clipped, 2u);
}

TEST(Segment, ValidateRejectsDataInUnobservedRow) {
  auto seg = window_session(session(4), 4).front();
  EXPECT_NO_THROW(seg.validate());
  seg.channels[4] = 1.0;  // row 1 is unobserved
  EXPECT_THROW(seg.validate(), std::invalid_argument);
}

TEST(Examples, HistoryIsTheMostRecentTen) {
  std::vector<Segment> segs;
  for (int i = 0; i < 13; ++i) segs.push_back(segment("u", 1000.0 * i));
  auto timelines = user_timelines(segs);
  auto ex = build_example(segs, timelines.at("u"), 12, 10);
  ASSERT_EQ(ex.history.size(), 10u);
  EXPECT_EQ(ex.history.front(), 2u);
  EXPECT_EQ(ex.history.back(), 11u);
  EXPECT_TRUE(build_example(segs, timelines.at("u"), 0, 10).history.empty());
}

TEST(Examples, GapIsStartMinusPreviousEnd) {
  auto a = segment("u", 0.0, 1000);
  auto b = segment("u", 4600.0);
  std::vector<Segment> segs{a, b};
  auto tl = user_timelines(segs).at("u");
  EXPECT_EQ(gap_before(segs, tl, 1), 3600.0);
  EXPECT_EQ(gap_before(segs, tl, 0), 0.0);
  auto ex = build_example(segs, tl, 1, 10);
  EXPECT_EQ(ex.gap, 3600.0);
}

TEST(Examples, HistoriesNeverContainFutureOrOtherUsers) {
  synth::CorpusConfig cfg;
  cfg.users = 3;
  cfg.sessions_per_user = 8;
  auto corpus = synth::generate_corpus(cfg, synth::default_devices());
  const auto& segs = corpus.store.segments;
  auto set = build_examples(segs, 10, GroupMode::user_sport);
  ASSERT_EQ(set.examples.size(), segs.size());
  for (const auto& ex : set.examples) {
    const auto& cur = segs[ex.current];
    double prev = -1e300;
    for (auto h : ex.history) {
      EXPECT_EQ(segs[h].user_id, cur.user_id);
      EXPECT_LE(segs[h].end_time_unix_s(), cur.start_time_unix_s);
      EXPECT_GE(segs[h].start_time_unix_s, prev);
      prev = segs[h].start_time_unix_s;
    }
  }
}

TEST(Examples, GroupKeys) {
  auto s = segment("u7", 0.0);
  s.sport = "cycle";
  EXPECT_EQ(group_key(s, GroupMode::user), "u7");
  EXPECT_EQ(group_key(s, GroupMode::sport), "cycle");
  EXPECT_NE(group_key(s, GroupMode::user_sport), group_key(segment("u7", 0.0), GroupMode::user_sport));
  EXPECT_EQ(parse_group_mode("user_sport"), GroupMode::user_sport);
  EXPECT_THROW(parse_group_mode("weekday"), std::invalid_argument);
}

TEST(Split, PaperRatios) {
  auto s = split_corpus(100, {0.8, 0.1, 0.1}, 1);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
}

TEST(Split, LargestRemainder) {
  EXPECT_EQ(split_sizes(9, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{7, 1, 1}));
  EXPECT_EQ(split_sizes(10, {0.5, 0.25, 0.25}), (std::array<std::size_t, 3>{5, 3, 2}));
  EXPECT_THROW(split_sizes(10, {0.5, 0.2, 0.2}), std::invalid_argument);
}

TEST(Split, DeterministicDisjointExhaustive) {
  for (std::size_t n : {1u, 2u, 9u, 37u, 100u, 1201u}) {
    auto a = split_corpus(n, {0.8, 0.1, 0.1}, 42);
    auto b = split_corpus(n, {0.8, 0.1, 0.1}, 42);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    std::vector<std::size_t> all;
    for (const auto* part : {&a.train, &a.val, &a.test}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(all, expect);
  }
}

TEST(Split, GroupedKeepsKeysTogether) {
  std::vector<std::string> keys;
  for (int i = 0; i < 60; ++i) keys.push_back("k" + std::to_string(i / 3));
  auto s = split_corpus_grouped(keys, {0.8, 0.1, 0.1}, 3);
  std::map<std::string, int> part;
  int p = 0;
  for (const auto* v : {&s.train, &s.val, &s.test}) {
    for (auto i : *v) {
      auto [it, fresh] = part.try_emplace(keys[i], p);
      EXPECT_EQ(it->second, p);
    }
    ++p;
  }
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 60u);
}

TEST(Normalizer, UnobservedStaysZeroAndObservedIsStandardised) {
  auto segs = window_session(session(450), 450);
  auto n = Normalizer::fit(segs, {0});
  auto f = n.features(segs[0]);
  ASSERT_EQ(f.size(), 450u * 3);
  double mean = 0.0, sq = 0.0;
  for (std::size_t t = 0; t < 450; ++t) {
    EXPECT_EQ(f[t * 3 + 1], 0.0);
    mean += f[t * 3];
    sq += f[t * 3] * f[t * 3];
  }
  EXPECT_NEAR(mean / 450, 0.0, 1e-12);
  EXPECT_NEAR(sq / 450, 1.0, 1e-9);
  EXPECT_EQ(n.hr_mean, 120.0);
  EXPECT_DOUBLE_EQ(n.denormalize_hr(n.hr(segs[0])[0]), 120.0);
  auto back = Normalizer::from_json(n.to_json());
  EXPECT_EQ(back.mean, n.mean);
  EXPECT_EQ(back.scale, n.scale);
}

TEST(Store, SaveLoadRoundTripAndObservedZeroCorpusWide) {
  synth::CorpusConfig cfg;
  cfg.users = 2;
  cfg.sessions_per_user = 3;
  auto corpus = synth::generate_corpus(cfg, synth::default_devices());
  for (const auto& s : corpus.store.segments) {
    EXPECT_NO_THROW(s.validate());
    for (std::size_t d = 0; d < s.dims(); ++d) {
      if (s.observed[d]) continue;
      for (std::size_t t = 0; t < s.length(); ++t) ASSERT_EQ(s.channel(d, t), 0.0);
    }
  }
  auto dir = std::filesystem::temp_directory_path() / "pulse_store_test";
  std::filesystem::remove_all(dir);
  corpus.store.save(dir);
  auto back = SegmentStore::load(dir);
  EXPECT_EQ(back.registry, corpus.store.registry);
  ASSERT_EQ(back.segments.size(), corpus.store.segments.size());
  for (std::size_t i = 0; i < back.segments.size(); ++i) {
    EXPECT_EQ(back.segments[i].channels, corpus.store.segments[i].channels);
    EXPECT_EQ(back.segments[i].hr, corpus.store.segments[i].hr);
    EXPECT_EQ(back.segments[i].observed, corpus.store.segments[i].observed);
    EXPECT_EQ(segment_to_line(back.segments[i]), segment_to_line(corpus.store.segments[i]));
  }
  std::filesystem::remove_all(dir);
}

TEST(Store, MissingManifestThrows) {
  auto dir = std::filesystem::temp_directory_path() / "pulse_store_missing";
  std::filesystem::remove_all(dir);
  EXPECT_ANY_THROW(SegmentStore::load(dir));
}

TEST(Store, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0})
    EXPECT_EQ(std::stod(format_double(v)), v) << format_double(v);
}
