#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "pulse/ingest/resample.hpp"
#include "pulse/ingest/units.hpp"
#include "pulse/ingest/vendor.hpp"

using namespace pulse;
using namespace pulse::ingest;

namespace {

const std::filesystem::path kSource = PULSE_SOURCE_DIR;

VendorSchema schema(const std::string& vendor) { return VendorSchema::load(kSource / "schemas" / (vendor + ".json")); }

RawSession tiny(std::vector<double> ts) {
  RawSession raw;
  raw.vendor = "test";
  raw.user_id = "u";
  raw.session_id = "s";
  raw.sport = "run";
  raw.timestamps = std::move(ts);
  return raw;
}

VendorSchema tiny_schema(double period = 1.0) {
  VendorSchema s;
  s.vendor = "test";
  s.sampling_period_s = period;
  s.columns = {{"hr", "bpm", kHeartRate}, {"spd", "m/s", "speed"}, {"alt", "m", "altitude"}};
  return s;
}

}  // namespace

TEST(Units, ExactDefinitions) {
  EXPECT_EQ(convert_units(1.0, "mph", "m/s"), 0.44704);
  EXPECT_EQ(convert_units(1.0, "mi", "m"), 1609.344);
  EXPECT_EQ(convert_units(32.0, "degF", "degC"), 0.0);
  EXPECT_NEAR(convert_units(212.0, "degF", "degC"), 100.0, 1e-12);
  EXPECT_EQ(convert_units(1.0, "ft", "m"), 0.3048);
  EXPECT_EQ(convert_units(3.0, "m", "m"), 3.0);
}

TEST(Units, InverseIsIdentity) {
  const std::pair<const char*, const char*> pairs[] = {{"mph", "m/s"}, {"degF", "degC"}};
  for (auto [a, b] : pairs)
    for (double v : {-40.0, 0.0, 1.0, 12.345, 98.6, 1e4})
      EXPECT_NEAR(convert_units(convert_units(v, a, b), b, a), v, 1e-12 * std::max(1.0, std::abs(v)));
}

TEST(Units, UnknownPairListsKnownOnes) {
  try {
    convert_units(1.0, "furlong", "m");
    FAIL();
  } catch (const UnitError& e) {
    EXPECT_NE(std::string(e.what()).find("mph->m/s"), std::string::npos);
  }
}

TEST(Resample, LinearInterpolants) {
  EXPECT_EQ(resample_uniform({0, 5}, {60, 70}), (std::vector<double>{60, 62, 64, 66, 68, 70}));
  EXPECT_EQ(resample_uniform({0, 5, 10}, {0, 10, 0}), (std::vector<double>{0, 2, 4, 6, 8, 10, 8, 6, 4, 2, 0}));
  std::vector<double> v{3.25, -1.5, 7.0, 0.125};
  EXPECT_EQ(resample_uniform({10, 11, 12, 13}, v), v);
}

TEST(Resample, BadTimestampsRejected) {
  EXPECT_THROW(resample_uniform({0, 0, 1}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(resample_uniform({0, 2, 1}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(resample_uniform({0}, {1}), std::invalid_argument);
}

TEST(DeriveSpeed, ForwardDifference) {
  EXPECT_EQ(derive_speed({0, 3, 6}).speed, (std::vector<double>{3, 3, 3}));
  EXPECT_EQ(derive_speed({5, 5, 5}).speed, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(derive_speed({0, 2, 2, 5}).speed, (std::vector<double>{2, 2, 0, 3}));
  auto d = derive_speed({0, 4, 3, 5});
  EXPECT_EQ(d.speed, (std::vector<double>{4, 4, 0, 2}));
  EXPECT_EQ(d.clamped, 1u);
}

TEST(Normalize, OnlySpeedAltitudeHeartRate) {
  auto raw = tiny({0, 1, 2, 3});
  raw.columns = {{"hr", {100, 101, 102, 103}}, {"spd", {1, 2, 3, 4}}, {"alt", {5, 5, 5, 5}}};
  auto reg = data::ChannelRegistry::standard();
  auto sessions = normalize_session(raw, tiny_schema(), reg);
  ASSERT_EQ(sessions.size(), 1u);
  const auto& s = sessions[0];
  for (std::size_t d = 0; d < reg.size(); ++d)
    EXPECT_EQ(s.observed[d] != 0, d == reg.index("speed") || d == reg.index("altitude")) << reg.name(d);
  EXPECT_EQ(s.hr, (std::vector<double>{100, 101, 102, 103}));
}

TEST(Normalize, MissingHeartRateIsAnError) {
  auto raw = tiny({0, 1});
  raw.columns = {{"spd", {1, 2}}};
  EXPECT_THROW(normalize_session(raw, tiny_schema(), data::ChannelRegistry::standard()), std::invalid_argument);
}

TEST(Normalize, UnmappedColumnWarns) {
  auto raw = tiny({0, 1});
  raw.columns = {{"hr", {100, 100}}, {"mystery", {1, 2}}};
  NormalizeReport report;
  auto sessions = normalize_session(raw, tiny_schema(), data::ChannelRegistry::standard(), &report);
  EXPECT_EQ(sessions.size(), 1u);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("mystery"), std::string::npos);
}

TEST(Normalize, LongGapSplitsSession) {
  auto raw = tiny({0, 1, 2, 100, 101, 102});
  raw.columns = {{"hr", {100, 100, 100, 110, 110, 110}}, {"spd", {1, 1, 1, 2, 2, 2}}};
  NormalizeReport report;
  auto sessions = normalize_session(raw, tiny_schema(), data::ChannelRegistry::standard(), &report);
  ASSERT_EQ(sessions.size(), 2u);
  EXPECT_EQ(report.gap_splits, 1u);
  EXPECT_EQ(sessions[1].start_time_unix_s, 100.0);
  EXPECT_EQ(sessions[0].length, 3u);
}

TEST(Normalize, DerivedSpeedWhenNoSpeedColumn) {
  auto raw = tiny({0, 1, 2, 3});
  raw.columns = {{"hr", {100, 100, 100, 100}}, {"dist", {0, 2, 2, 5}}};
  auto s = tiny_schema();
  s.columns.push_back({"dist", "m", "distance"});
  NormalizeReport report;
  auto reg = data::ChannelRegistry::standard();
  auto sessions = normalize_session(raw, s, reg, &report);
  EXPECT_EQ(report.speed_source, "derived");
  const auto& out = sessions.at(0);
  const auto row = reg.index("speed");
  std::vector<double> speed(out.channels.begin() + row * 4, out.channels.begin() + row * 4 + 4);
  EXPECT_EQ(speed, (std::vector<double>{2, 2, 0, 3}));
}

TEST(Normalize, HuaweiMphAtFiveSecondsBecomesMetresPerSecondAtOne) {
  auto raw = read_raw_session(kSource / "tests/data/ingest/huawei/hw_run_01.csv", "timestamp");
  auto reg = data::ChannelRegistry::standard();
  auto sessions = normalize_session(raw, schema("huawei"), reg);
  ASSERT_EQ(sessions.size(), 1u);
  const auto& s = sessions[0];
  EXPECT_EQ(s.length, 496u);
  const auto row = reg.index("speed");
  const auto& mph = raw.columns.at("speed_mph");
  EXPECT_NEAR(s.channels[row * s.length + 0], mph[0] * 0.44704, 1e-12);
  EXPECT_NEAR(s.channels[row * s.length + 5], mph[1] * 0.44704, 1e-12);
  EXPECT_NEAR(s.channels[row * s.length + 2], (0.6 * mph[0] + 0.4 * mph[1]) * 0.44704, 1e-12);
  const auto temp = reg.index("temperature");
  EXPECT_NEAR(s.channels[temp * s.length], (raw.columns.at("temperature_f")[0] - 32.0) * 5.0 / 9.0, 1e-12);
}

TEST(Normalize, SchemaValidation) {
  auto s = tiny_schema();
  s.columns.push_back({"x", "m", "not_a_channel"});
  EXPECT_ANY_THROW(s.validate(data::ChannelRegistry::standard()));
  auto p = tiny_schema(0.0);
  EXPECT_ANY_THROW(p.validate(data::ChannelRegistry::standard()));
  for (const char* v : {"fitrec", "coros", "garmin", "huawei"})
    EXPECT_NO_THROW(schema(v).validate(data::ChannelRegistry::standard())) << v;
}

TEST(Ingest, DirectoryProducesSegmentsAndReport) {
  auto result = ingest_directory(kSource / "tests/data/ingest/huawei", schema("huawei"),
                                 data::ChannelRegistry::standard());
  EXPECT_TRUE(result.ok());
  EXPECT_EQ(result.report.files, 2u);
  EXPECT_EQ(result.store.segments.size(), 2u);
  EXPECT_EQ(result.report.segments_per_sport.at("run"), 1u);
  EXPECT_EQ(result.report.dropped_samples, 2u * (496 - 450));
}
