#include "pulse/data/store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <tuple>

namespace pulse::data {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

Vocabularies Vocabularies::build(const std::vector<Segment>& segments) {
  Vocabularies v;
  for (const auto& s : segments) {
    v.user.add(s.user_id);
    v.sport.add(s.sport);
    v.device.add(s.device);
    if (!s.gender.empty()) v.gender.add(s.gender);
  }
  return v;
}

nlohmann::json Vocabularies::to_json() const {
  return {{"user", user.to_json()}, {"sport", sport.to_json()}, {"device", device.to_json()},
          {"gender", gender.to_json()}};
}

Vocabularies Vocabularies::from_json(const nlohmann::json& j) {
  Vocabularies v;
  v.user = Vocabulary::from_json(j.at("user"));
  v.sport = Vocabulary::from_json(j.at("sport"));
  v.device = Vocabulary::from_json(j.at("device"));
  v.gender = Vocabulary::from_json(j.at("gender"));
  return v;
}

void SegmentStore::sort() {
  std::stable_sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.user_id, a.start_time_unix_s, a.session_id, a.segment_index) <
           std::tie(b.user_id, b.start_time_unix_s, b.session_id, b.segment_index);
  });
}

std::string segment_to_line(const Segment& s) {
  std::string out;
  out.reserve(s.channels.size() * 4 + s.hr.size() * 8 + 256);
  auto str = [&](const std::string& v) { out += nlohmann::json(v).dump(); };
  auto num_array = [&](auto first, auto last) {
    out += '[';
    for (auto it = first; it != last; ++it) {
      if (it != first) out += ',';
      out += format_double(*it);
    }
    out += ']';
  };
  out += "{\"user_id\":";
  str(s.user_id);
  out += ",\"session_id\":";
  str(s.session_id);
  out += ",\"segment_index\":" + std::to_string(s.segment_index);
  out += ",\"sport\":";
  str(s.sport);
  out += ",\"device\":";
  str(s.device);
  if (!s.gender.empty()) {
    out += ",\"gender\":";
    str(s.gender);
  }
  out += ",\"start_time_unix_s\":" + format_double(s.start_time_unix_s);
  out += ",\"dt_s\":" + format_double(s.dt_s);
  out += ",\"observed\":[";
  for (std::size_t d = 0; d < s.observed.size(); ++d) out += (d ? "," : "") + std::string(s.observed[d] ? "true" : "false");
  out += "],\"channels\":[";
  const std::size_t T = s.length();
  for (std::size_t d = 0; d < s.dims(); ++d) {
    if (d) out += ',';
    num_array(s.channels.begin() + d * T, s.channels.begin() + (d + 1) * T);
  }
  out += "],\"hr\":";
  num_array(s.hr.begin(), s.hr.end());
  if (s.hr_clipped) out += ",\"hr_clipped\":" + std::to_string(s.hr_clipped);
  out += '}';
  return out;
}

Segment segment_from_json(const nlohmann::json& j, std::size_t dims) {
  Segment s;
  s.user_id = j.at("user_id").get<std::string>();
  s.session_id = j.at("session_id").get<std::string>();
  s.segment_index = j.at("segment_index").get<std::size_t>();
  s.sport = j.at("sport").get<std::string>();
  s.device = j.at("device").get<std::string>();
  if (j.contains("gender")) s.gender = j["gender"].get<std::string>();
  s.start_time_unix_s = j.at("start_time_unix_s").get<double>();
  s.dt_s = j.at("dt_s").get<double>();
  for (bool b : j.at("observed")) s.observed.push_back(b ? 1 : 0);
  s.hr = j.at("hr").get<std::vector<double>>();
  const auto& ch = j.at("channels");
  if (s.observed.size() != dims || ch.size() != dims)
    throw std::invalid_argument("segment " + s.session_id + ": expected " + std::to_string(dims) + " channels");
  const std::size_t T = s.hr.size();
  s.channels.reserve(dims * T);
  for (const auto& row : ch) {
    if (row.size() != T) throw std::invalid_argument("segment " + s.session_id + ": ragged channel row");
    for (const auto& v : row) s.channels.push_back(v.get<double>());
  }
  if (j.contains("hr_clipped")) s.hr_clipped = j["hr_clipped"].get<std::size_t>();
  return s;
}

void SegmentStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kStoreVersion;
  manifest["float_format"] = "shortest-roundtrip decimal";
  manifest["registry"] = registry.to_json();
  manifest["vocabularies"] = vocabularies().to_json();
  manifest["segments"] = segments.size();
  manifest["info"] = info;
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  std::ofstream out(dir / "segments.jsonl", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "segments.jsonl").string());
  for (const auto& s : segments) out << segment_to_line(s) << '\n';
  if (!out) throw std::runtime_error("failed writing segment store " + dir.string());
}

SegmentStore SegmentStore::load(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("segment store manifest not found in " + dir.string());
  const auto manifest = nlohmann::json::parse(mf);
  if (manifest.at("format_version").get<int>() != kStoreVersion)
    throw std::runtime_error("unsupported segment store version in " + dir.string());
  SegmentStore store;
  store.registry = ChannelRegistry::from_json(manifest.at("registry"));
  if (manifest.contains("info")) store.info = manifest["info"];
  std::ifstream in(dir / "segments.jsonl", std::ios::binary);
  if (!in) throw std::runtime_error("segments.jsonl not found in " + dir.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      store.segments.push_back(segment_from_json(nlohmann::json::parse(line), store.registry.size()));
    } catch (const std::exception& e) {
      throw std::runtime_error("segments.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  const auto expected = manifest.at("segments").get<std::size_t>();
  if (expected != store.segments.size())
    throw std::runtime_error("segment store truncated: manifest lists " + std::to_string(expected) +
                             " segments, found " + std::to_string(store.segments.size()));
  return store;
}

}  // namespace pulse::data
