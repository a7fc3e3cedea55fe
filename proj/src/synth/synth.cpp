#include "pulse/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pulse/ingest/units.hpp"
#include "pulse/util/rng.hpp"

namespace pulse::synth {

namespace {

struct SportShape {
  double speed_lo, speed_hi;  // m/s
  double gain;                // bpm per m/s, population centre
  double cadence_base, cadence_per_speed;
  double power_per_speed;
};

SportShape shape(const std::string& sport) {
  if (sport == "cycle") return {4.0, 10.0, 6.5, 60.0, 4.0, 22.0};
  if (sport == "hike") return {0.8, 1.8, 30.0, 95.0, 8.0, 40.0};
  return {2.0, 4.5, 15.0, 150.0, 8.0, 75.0};  // run and anything else
}

double truncated_normal(Rng& rng, double sd) {
  if (sd <= 0.0) return 0.0;
  for (;;) {
    const double z = normal(rng);
    if (std::abs(z) <= 3.0) return z * sd;
  }
}

}  // namespace

void UserProfile::validate() const {
  if (!(hr_rest >= 20.0 && hr_rest < hr_max && hr_max <= 220.0))
    throw std::invalid_argument("profile: need 20 <= hr_rest < hr_max <= 220");
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("profile: response rate must lie in (0, 1]");
}

double UserProfile::demand(const std::string& sport, double speed, double grade) const {
  auto it = gain.find(sport);
  const double g = it == gain.end() ? shape(sport).gain : it->second;
  return std::min(hr_max, hr_rest + g * speed + 40.0 * std::max(grade, 0.0));
}

nlohmann::json UserProfile::to_json() const {
  return {{"hr_rest", hr_rest}, {"hr_max", hr_max}, {"k", k}, {"drift", drift}, {"gain", gain}};
}

void DeviceTemplate::validate() const {
  if (!(period_s > 0.0)) throw std::invalid_argument("device " + name + ": period must be positive");
  auto has = [&](const std::string& c) {
    return std::any_of(channels.begin(), channels.end(), [&](const DeviceChannel& d) { return d.channel == c; });
  };
  if (!has("speed") || !has("altitude"))
    throw std::invalid_argument("device " + name + ": must emit speed and altitude");
}

ingest::VendorSchema DeviceTemplate::schema() const {
  ingest::VendorSchema s;
  s.vendor = name;
  s.sampling_period_s = period_s;
  s.timestamp_column = "timestamp";
  s.columns.push_back({"heart_rate", "bpm", ingest::kHeartRate});
  for (const auto& c : channels) s.columns.push_back({c.channel + "_" + c.unit, c.unit, c.channel});
  s.speed_precedence = {"raw", "derived"};
  return s;
}

DeviceTemplate DeviceTemplate::from_json(const nlohmann::json& j) {
  DeviceTemplate d;
  d.name = j.at("name").get<std::string>();
  d.period_s = j.at("period_s").get<double>();
  for (const auto& c : j.at("channels"))
    d.channels.push_back({c.at("channel").get<std::string>(), c.at("unit").get<std::string>(), c.value("noise", 0.0)});
  d.validate();
  return d;
}

nlohmann::json DeviceTemplate::to_json() const {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : channels) ch.push_back({{"channel", c.channel}, {"unit", c.unit}, {"noise", c.noise}});
  return {{"name", name}, {"period_s", period_s}, {"channels", ch}};
}

std::vector<DeviceTemplate> load_devices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("devices file not found: " + path.string());
  const auto j = nlohmann::json::parse(in);
  std::vector<DeviceTemplate> out;
  for (const auto& d : j.at("devices")) out.push_back(DeviceTemplate::from_json(d));
  if (out.empty()) throw std::invalid_argument("devices file lists no devices");
  return out;
}

std::vector<DeviceTemplate> default_devices() {
  DeviceTemplate a{"watch_a", 1.0,
                   {{"distance", "m", 0.0},
                    {"speed", "m/s", 0.05},
                    {"altitude", "m", 0.3},
                    {"cadence", "spm", 1.0},
                    {"power", "W", 5.0},
                    {"stride_length", "mm", 10.0}}};
  DeviceTemplate b{"band_b", 5.0,
                   {{"distance", "mi", 0.0},
                    {"speed", "mph", 0.05},
                    {"altitude", "ft", 0.3},
                    {"cadence", "spm", 1.0},
                    {"temperature", "degF", 0.1}}};
  return {a, b};
}

std::vector<double> integrate_hr(const UserProfile& p, const std::string& sport, const std::vector<double>& speed,
                                 const std::vector<double>& grade, double hr0) {
  const std::size_t n = speed.size();
  std::vector<double> hr(n);
  double h = hr0;
  for (std::size_t t = 0; t < n; ++t) {
    hr[t] = h;
    const double dem = p.demand(sport, speed[t], grade[t]);
    const double effort = std::clamp((dem - p.hr_rest) / (p.hr_max - p.hr_rest), 0.0, 1.0);
    h += p.k * (dem - h) + p.drift * effort;
    h = std::clamp(h, p.hr_rest, p.hr_max);
  }
  return hr;
}

SimulatedSession simulate_session(const UserProfile& profile, const DeviceTemplate& device, const std::string& sport,
                                  std::size_t duration, std::uint64_t seed, double start_time, double hr_noise_sd) {
  profile.validate();
  device.validate();
  if (duration < 2) throw std::invalid_argument("simulate_session: duration must be at least 2 s");
  Rng rng(seed);
  const auto sh = shape(sport);
  SimulatedSession sim;
  sim.speed.resize(duration);
  sim.grade.resize(duration);
  // Piecewise targets, smoothed by a first-order lag.
  double speed = uniform(rng, sh.speed_lo, sh.speed_hi), target = speed;
  double grade = 0.0, grade_target = 0.0;
  std::size_t next_speed = 0, next_grade = 0;
  for (std::size_t t = 0; t < duration; ++t) {
    if (t == next_speed) {
      target = uniform01(rng) < 0.12 ? 0.0 : uniform(rng, sh.speed_lo, sh.speed_hi);
      next_speed = t + static_cast<std::size_t>(uniform(rng, 40.0, 160.0));
    }
    if (t == next_grade) {
      grade_target = uniform(rng, -0.12, 0.15);
      next_grade = t + static_cast<std::size_t>(uniform(rng, 60.0, 200.0));
    }
    speed += 0.08 * (target - speed);
    grade += 0.05 * (grade_target - grade);
    sim.speed[t] = std::max(0.0, speed);
    sim.grade[t] = grade;
  }
  sim.hr_true = integrate_hr(profile, sport, sim.speed, sim.grade, profile.hr_rest + uniform(rng, 0.0, 10.0));

  // Canonical-unit ground truth for every emitted channel.
  const double temp_c = uniform(rng, 5.0, 28.0);
  std::vector<double> distance(duration), altitude(duration);
  double dist = 0.0, alt = uniform(rng, 50.0, 800.0);
  for (std::size_t t = 0; t < duration; ++t) {
    distance[t] = dist;
    altitude[t] = alt;
    dist += sim.speed[t];
    alt += sim.speed[t] * sim.grade[t];
  }
  auto truth = [&](const std::string& ch, std::size_t t) -> double {
    const double v = sim.speed[t];
    if (ch == "distance") return distance[t];
    if (ch == "speed" || ch == "enhanced_speed") return v;
    if (ch == "altitude") return altitude[t];
    if (ch == "cadence") return v > 0.1 ? sh.cadence_base + sh.cadence_per_speed * v : 0.0;
    if (ch == "power") return std::max(0.0, sh.power_per_speed * v * (1.0 + 8.0 * sim.grade[t]));
    if (ch == "stride_length") {
      const double cad = v > 0.1 ? sh.cadence_base + sh.cadence_per_speed * v : 0.0;
      return cad > 0.0 ? v / cad * 60.0 : 0.0;
    }
    if (ch == "temperature") return temp_c + 0.002 * static_cast<double>(t);
    return 0.0;
  };

  auto& raw = sim.raw;
  raw.vendor = device.name;
  raw.sport = sport;
  const auto step = static_cast<std::size_t>(std::llround(device.period_s));
  if (step == 0) throw std::invalid_argument("device period below 1 s is not supported by the simulator");
  std::vector<std::size_t> ticks;
  for (std::size_t t = 0; t < duration; t += step) ticks.push_back(t);
  for (auto t : ticks) raw.timestamps.push_back(start_time + static_cast<double>(t));
  auto& hr = raw.columns["heart_rate"];
  for (auto t : ticks) hr.push_back(sim.hr_true[t] + truncated_normal(rng, hr_noise_sd));
  static const auto registry = data::ChannelRegistry::standard();
  for (const auto& c : device.channels) {
    const auto& canonical_unit = registry.unit(registry.index(c.channel));
    const auto to_raw = ingest::conversion(canonical_unit, c.unit);
    auto& col = raw.columns[c.channel + "_" + c.unit];
    for (auto t : ticks) {
      double v = truth(c.channel, t);
      if (c.channel != "distance") v += truncated_normal(rng, c.noise);
      if (c.channel == "speed" || c.channel == "cadence" || c.channel == "power" || c.channel == "stride_length")
        v = std::max(0.0, v);
      col.push_back(to_raw.apply(v));
    }
  }
  return sim;
}

UserProfile sample_profile(const std::vector<std::string>& sports, std::uint64_t seed) {
  Rng rng(seed);
  UserProfile p;
  p.hr_rest = uniform(rng, 48.0, 72.0);
  p.hr_max = uniform(rng, 172.0, 200.0);
  p.k = uniform(rng, 0.02, 0.08);
  p.drift = uniform(rng, 0.0, 0.02);
  for (const auto& s : sports) p.gain[s] = shape(s).gain * uniform(rng, 0.6, 1.4);
  return p;
}

nlohmann::json CorpusConfig::to_json() const {
  return {{"users", users},       {"sessions_per_user", sessions_per_user},
          {"sports", sports},     {"min_duration", min_duration},
          {"max_duration", max_duration}, {"window", window},
          {"seed", seed}};
}

SyntheticCorpus generate_corpus(const CorpusConfig& cfg, const std::vector<DeviceTemplate>& devices) {
  if (devices.empty()) throw std::invalid_argument("generate_corpus: no devices");
  if (cfg.sports.empty()) throw std::invalid_argument("generate_corpus: no sports");
  if (cfg.min_duration < cfg.window || cfg.max_duration < cfg.min_duration)
    throw std::invalid_argument("generate_corpus: durations must cover at least one window");
  const auto registry = data::ChannelRegistry::standard();
  SyntheticCorpus out;
  out.store.registry = registry;
  struct Keyed {
    data::Segment seg;
    std::vector<double> oracle;
  };
  std::vector<Keyed> all;
  nlohmann::json profiles = nlohmann::json::array();
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const auto profile = sample_profile(cfg.sports, derive_seed(cfg.seed, {u, 0x70726f66}));
    out.profiles.push_back(profile);
    const auto& device = devices[u % devices.size()];
    const auto schema = device.schema();
    Rng urng(derive_seed(cfg.seed, {u, 0x75736572}));
    // Each user favours one or two sports.
    std::vector<std::string> mine{cfg.sports[u % cfg.sports.size()]};
    if (cfg.sports.size() > 1 && uniform01(urng) < 0.5) mine.push_back(cfg.sports[(u + 1) % cfg.sports.size()]);
    const std::string user_id = "u" + std::string(u < 10 ? "0" : "") + std::to_string(u);
    const std::string gender = (u % 2 == 0) ? "f" : "m";
    profiles.push_back({{"user_id", user_id}, {"device", device.name}, {"sports", mine}, {"profile", profile.to_json()}});
    double clock = 1.6e9 + static_cast<double>(u) * 3600.0 + std::floor(uniform(urng, 0.0, 86400.0));
    for (std::size_t s = 0; s < cfg.sessions_per_user; ++s) {
      const auto& sport = mine[std::min(mine.size() - 1, static_cast<std::size_t>(uniform01(urng) * mine.size()))];
      const auto duration = cfg.min_duration +
                            static_cast<std::size_t>(uniform01(urng) * static_cast<double>(cfg.max_duration - cfg.min_duration + 1));
      auto sim = simulate_session(profile, device, sport, std::min(duration, cfg.max_duration),
                                  derive_seed(cfg.seed, {u, s, 0x73657373}), clock);
      sim.raw.user_id = user_id;
      sim.raw.gender = gender;
      sim.raw.session_id = user_id + "-s" + std::to_string(1000 + s).substr(1);
      auto sessions = ingest::normalize_session(sim.raw, schema, registry);
      ++out.sessions;
      for (const auto& sess : sessions) {
        const auto offset = static_cast<std::size_t>(sess.start_time_unix_s - clock);
        for (auto& seg : data::window_session(sess, cfg.window)) {
          Keyed k;
          const auto from = offset + seg.segment_index * cfg.window;
          k.oracle.assign(sim.hr_true.begin() + from, sim.hr_true.begin() + from + cfg.window);
          k.seg = std::move(seg);
          all.push_back(std::move(k));
        }
      }
      clock += static_cast<double>(duration) + std::floor(uniform(urng, 6.0 * 3600.0, 72.0 * 3600.0));
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.seg.user_id, a.seg.start_time_unix_s, a.seg.session_id, a.seg.segment_index) <
           std::tie(b.seg.user_id, b.seg.start_time_unix_s, b.seg.session_id, b.seg.segment_index);
  });
  for (auto& k : all) {
    out.store.segments.push_back(std::move(k.seg));
    out.oracle_hr.push_back(std::move(k.oracle));
  }
  nlohmann::json devs = nlohmann::json::array();
  for (const auto& d : devices) devs.push_back(d.to_json());
  out.store.info = {{"source", "synth"}, {"config", cfg.to_json()}, {"devices", devs}, {"users", profiles},
                    {"hr_noise_sd", kHrNoiseSd}};
  return out;
}

}  // namespace pulse::synth
