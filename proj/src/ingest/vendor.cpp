#include "pulse/ingest/vendor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pulse/ingest/resample.hpp"
#include "pulse/ingest/units.hpp"

namespace pulse::ingest {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, const std::string& where) {
  if (cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": not a number '" + cell + "'");
  }
  if (used != cell.size()) throw std::invalid_argument(where + ": not a number '" + cell + "'");
  return v;
}

// Value at grid times t0 + k (k < n) from the finite samples of (ts, vs);
// values beyond the sampled range hold the nearest edge.
bool sample_grid(const std::vector<double>& ts, const std::vector<double>& vs, double t0, std::size_t n,
                 std::vector<double>& out) {
  std::vector<double> t, v;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (std::isfinite(vs[i])) t.push_back(ts[i]), v.push_back(vs[i]);
  if (t.size() < 2) return false;
  out.assign(n, 0.0);
  const auto inner = resample_uniform(t, v, 1.0);  // starts at t.front()
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = t0 + static_cast<double>(k);
    if (tk <= t.front()) {
      out[k] = v.front();
    } else if (tk >= t.back()) {
      out[k] = v.back();
    } else {
      const double off = tk - t.front();
      const auto j = static_cast<std::size_t>(std::floor(off + 1e-9));
      if (std::abs(off - static_cast<double>(j)) < 1e-9 && j < inner.size()) {
        out[k] = inner[j];
      } else {
        // grid offset from the column's own start is fractional: interpolate directly
        auto it = std::upper_bound(t.begin(), t.end(), tk);
        const std::size_t b = static_cast<std::size_t>(it - t.begin()), a = b - 1;
        out[k] = v[a] + ((v[b] - v[a]) * (tk - t[a])) / (t[b] - t[a]);
      }
    }
  }
  return true;
}

}  // namespace

void VendorSchema::validate(const data::ChannelRegistry& registry) const {
  if (!(sampling_period_s > 0.0)) throw std::invalid_argument("schema " + vendor + ": sampling period must be > 0");
  bool has_hr = false;
  for (const auto& c : columns) {
    if (c.channel == kHeartRate) {
      has_hr = true;
      conversion(c.unit, "bpm");
      continue;
    }
    const auto idx = registry.find(c.channel);
    if (!idx) throw std::invalid_argument("schema " + vendor + ": column " + c.raw + " maps to unknown channel " + c.channel);
    conversion(c.unit, registry.unit(*idx));
  }
  if (!has_hr) throw std::invalid_argument("schema " + vendor + ": no heart-rate column");
  for (const auto& s : speed_precedence)
    if (s != "enhanced" && s != "raw" && s != "derived")
      throw std::invalid_argument("schema " + vendor + ": unknown speed source " + s);
}

nlohmann::json VendorSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) cols.push_back({{"raw", c.raw}, {"unit", c.unit}, {"channel", c.channel}});
  return {{"vendor", vendor},
          {"sampling_period_s", sampling_period_s},
          {"timestamp_column", timestamp_column},
          {"speed_precedence", speed_precedence},
          {"columns", cols}};
}

VendorSchema VendorSchema::from_json(const nlohmann::json& j) {
  VendorSchema s;
  s.vendor = j.at("vendor").get<std::string>();
  s.sampling_period_s = j.at("sampling_period_s").get<double>();
  s.timestamp_column = j.value("timestamp_column", std::string("timestamp"));
  if (j.contains("speed_precedence")) s.speed_precedence = j["speed_precedence"].get<std::vector<std::string>>();
  for (const auto& c : j.at("columns"))
    s.columns.push_back({c.at("raw").get<std::string>(), c.at("unit").get<std::string>(),
                         c.at("channel").get<std::string>()});
  return s;
}

VendorSchema VendorSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("schema not found: " + path.string());
  return from_json(nlohmann::json::parse(in));
}

RawSession read_raw_session(const std::filesystem::path& path, const std::string& timestamp_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  RawSession raw;
  raw.session_id = path.stem().string();
  std::string line;
  std::vector<std::string> header;
  char delim = ',';
  std::vector<std::vector<double>> cols;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const auto key = trim(body.substr(0, eq)), val = trim(body.substr(eq + 1));
      if (key == "user_id") raw.user_id = val;
      else if (key == "sport") raw.sport = val;
      else if (key == "gender") raw.gender = val;
      else if (key == "session_id") raw.session_id = val;
      else if (key == "vendor") raw.vendor = val;
      continue;
    }
    if (header.empty()) {
      for (char c : {'\t', ';', ','})
        if (t.find(c) != std::string::npos) {
          delim = c;
          break;
        }
      header = split(t, delim);
      cols.resize(header.size());
      continue;
    }
    const auto cells = split(t, delim);
    if (cells.size() != header.size())
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " cells");
    for (std::size_t c = 0; c < cells.size(); ++c)
      cols[c].push_back(parse_cell(cells[c], path.string() + ":" + std::to_string(lineno)));
  }
  if (header.empty()) throw std::invalid_argument(path.string() + ": no header row");
  bool found = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == timestamp_column) {
      raw.timestamps = cols[c];
      found = true;
    } else {
      raw.columns[header[c]] = std::move(cols[c]);
    }
  }
  if (!found) throw std::invalid_argument(path.string() + ": missing timestamp column '" + timestamp_column + "'");
  if (raw.user_id.empty()) throw std::invalid_argument(path.string() + ": missing '# user_id=' metadata");
  if (raw.sport.empty()) raw.sport = "unknown";
  return raw;
}

std::vector<data::Session> normalize_session(const RawSession& raw, const VendorSchema& schema,
                                             const data::ChannelRegistry& registry, NormalizeReport* report,
                                             double max_gap_s) {
  NormalizeReport local;
  NormalizeReport& rep = report ? *report : local;
  const auto& ts = raw.timestamps;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1]))
      throw std::invalid_argument("session " + raw.session_id + ": timestamps not strictly increasing");

  // Which schema entries are present in this file.
  std::vector<const ColumnMap*> present;
  const ColumnMap* hr_col = nullptr;
  for (const auto& c : schema.columns) {
    if (!raw.columns.count(c.raw)) continue;
    if (c.channel == kHeartRate) {
      if (!hr_col) hr_col = &c;
    } else {
      present.push_back(&c);
    }
  }
  if (!hr_col) throw std::invalid_argument("session " + raw.session_id + ": no heart-rate column");
  for (const auto& [name, values] : raw.columns) {
    const bool mapped = std::any_of(schema.columns.begin(), schema.columns.end(),
                                    [&](const ColumnMap& c) { return c.raw == name; });
    if (!mapped) rep.warnings.push_back("session " + raw.session_id + ": unmapped column '" + name + "' skipped");
  }

  // Contiguous runs.
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= ts.size(); ++i) {
    if (i == ts.size() || ts[i] - ts[i - 1] > max_gap_s) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  if (runs.size() > 1) rep.gap_splits += runs.size() - 1;

  const std::size_t D = registry.size();
  const auto speed_idx = registry.find("speed");
  const auto enh_idx = registry.find("enhanced_speed");
  const auto dist_idx = registry.find("distance");
  std::vector<data::Session> out;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto [b, e] = runs[r];
    if (e - b < 2) continue;
    const std::vector<double> rts(ts.begin() + b, ts.begin() + e);
    const auto n = static_cast<std::size_t>(std::floor(rts.back() - rts.front() + 1e-9)) + 1;
    data::Session s;
    s.user_id = raw.user_id;
    s.session_id = runs.size() > 1 ? raw.session_id + "-" + std::to_string(r) : raw.session_id;
    s.sport = raw.sport;
    s.device = raw.vendor.empty() ? schema.vendor : raw.vendor;
    s.gender = raw.gender;
    s.start_time_unix_s = rts.front();
    s.length = n;
    s.observed.assign(D, 0);
    s.channels.assign(D * n, 0.0);

    auto grid = [&](const ColumnMap& c, const std::string& to_unit, std::vector<double>& dst) {
      const auto conv = conversion(c.unit, to_unit);
      const auto& col = raw.columns.at(c.raw);
      std::vector<double> v(col.begin() + b, col.begin() + e);
      for (auto& x : v) x = std::isfinite(x) ? conv.apply(x) : x;
      return sample_grid(rts, v, rts.front(), n, dst);
    };

    std::vector<double> buf;
    bool raw_speed = false;
    std::vector<double> raw_speed_values;
    for (const ColumnMap* c : present) {
      const std::size_t d = registry.index(c->channel);
      if (s.observed[d]) continue;  // an earlier alias already filled it
      if (!grid(*c, registry.unit(d), buf)) continue;
      if (speed_idx && d == *speed_idx) {
        raw_speed = true;
        raw_speed_values = buf;
        continue;  // placed after precedence resolution
      }
      s.observed[d] = 1;
      std::copy(buf.begin(), buf.end(), s.channels.begin() + d * n);
    }

    if (speed_idx) {
      rep.speed_source.clear();
      for (const auto& src : schema.speed_precedence) {
        const double* from = nullptr;
        std::vector<double> derived;
        if (src == "enhanced" && enh_idx && s.observed[*enh_idx]) {
          from = s.channels.data() + *enh_idx * n;
        } else if (src == "raw" && raw_speed) {
          from = raw_speed_values.data();
        } else if (src == "derived" && dist_idx && s.observed[*dist_idx]) {
          std::vector<double> dist(s.channels.begin() + *dist_idx * n, s.channels.begin() + (*dist_idx + 1) * n);
          auto ds = derive_speed(dist, 1.0);
          rep.clamped_distance += ds.clamped;
          derived = std::move(ds.speed);
          from = derived.data();
        }
        if (from) {
          std::copy(from, from + n, s.channels.begin() + *speed_idx * n);
          s.observed[*speed_idx] = 1;
          rep.speed_source = src;
          break;
        }
      }
    }

    if (!grid(*hr_col, "bpm", s.hr))
      throw std::invalid_argument("session " + raw.session_id + ": heart-rate column has fewer than two values");
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json IngestReport::to_json() const {
  return {{"files", files},
          {"failed_files", failed_files},
          {"sessions", sessions},
          {"segments", segments},
          {"dropped_samples", dropped_samples},
          {"segments_per_sport", segments_per_sport},
          {"warnings", warnings},
          {"errors", errors}};
}

IngestResult ingest_directory(const std::filesystem::path& dir, const VendorSchema& schema,
                              const data::ChannelRegistry& registry, std::size_t window) {
  schema.validate(registry);
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("input directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  IngestResult result;
  result.store.registry = registry;
  auto& rep = result.report;
  std::map<std::string, std::size_t> speed_sources;
  for (const auto& f : files) {
    ++rep.files;
    try {
      auto raw = read_raw_session(f, schema.timestamp_column);
      if (raw.vendor.empty()) raw.vendor = schema.vendor;
      NormalizeReport nrep;
      auto sessions = normalize_session(raw, schema, registry, &nrep);
      for (auto& w : nrep.warnings) rep.warnings.push_back(f.filename().string() + ": " + w);
      if (!nrep.speed_source.empty()) ++speed_sources[nrep.speed_source];
      for (const auto& s : sessions) {
        ++rep.sessions;
        auto segs = data::window_session(s, window);
        rep.dropped_samples += s.length - segs.size() * window;
        for (auto& seg : segs) {
          ++rep.segments_per_sport[seg.sport];
          ++rep.segments;
          result.store.segments.push_back(std::move(seg));
        }
      }
    } catch (const std::exception& e) {
      ++rep.failed_files;
      rep.errors.push_back(f.filename().string() + ": " + e.what());
    }
  }
  result.store.sort();
  result.store.info = {{"source", "ingest"},
                       {"vendor", schema.vendor},
                       {"schema", schema.to_json()},
                       {"window", window},
                       {"speed_sources", speed_sources}};
  return result;
}

}  // namespace pulse::ingest
