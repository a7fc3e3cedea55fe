#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/data/store.hpp"
#include "pulse/ingest/vendor.hpp"

namespace pulse::synth {

inline constexpr double kHrNoiseSd = 2.0;

/// First-order heart-rate response of one simulated athlete.
struct UserProfile {
  double hr_rest = 60.0;
  double hr_max = 190.0;
  double k = 0.05;       // response rate, 1/s
  double drift = 0.0;    // bpm/s at full sustained effort
  std::map<std::string, double> gain;  // bpm per m/s, per sport

  void validate() const;
  double demand(const std::string& sport, double speed, double grade) const;
  nlohmann::json to_json() const;
};

struct DeviceChannel {
  std::string channel;  // canonical name
  std::string unit;     // unit the device reports
  double noise = 0.0;   // additive sensor noise sd, in canonical units
};

struct DeviceTemplate {
  std::string name;
  double period_s = 1.0;
  std::vector<DeviceChannel> channels;

  /// Throws unless speed and altitude are emitted and the period is positive.
  void validate() const;
  /// The schema that ingests this device's exports.
  ingest::VendorSchema schema() const;

  static DeviceTemplate from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<DeviceTemplate> load_devices(const std::filesystem::path& path);
/// The two built-in templates: a 1 s device and a 5 s device with imperial units.
std::vector<DeviceTemplate> default_devices();

struct SimulatedSession {
  ingest::RawSession raw;         // what the device exports
  std::vector<double> speed;      // 1 s ground truth, m/s
  std::vector<double> grade;      // 1 s ground truth, fraction
  std::vector<double> hr_true;    // noise-free heart rate at 1 s
};

/// Simulates `duration` seconds (>= 2) of exercise with explicit Euler
/// integration at 1 s. HR noise is Gaussian truncated at 3 sd.
SimulatedSession simulate_session(const UserProfile& profile, const DeviceTemplate& device, const std::string& sport,
                                  std::size_t duration, std::uint64_t seed, double start_time_unix_s = 0.0,
                                  double hr_noise_sd = kHrNoiseSd);

/// Same dynamics with a caller-supplied intensity path (used by tests).
std::vector<double> integrate_hr(const UserProfile& profile, const std::string& sport,
                                 const std::vector<double>& speed, const std::vector<double>& grade,
                                 double hr0);

UserProfile sample_profile(const std::vector<std::string>& sports, std::uint64_t seed);

struct CorpusConfig {
  std::size_t users = 20;
  std::size_t sessions_per_user = 60;
  std::vector<std::string> sports{"run", "cycle", "hike"};
  std::size_t min_duration = 450;
  std::size_t max_duration = 900;
  std::size_t window = data::kDefaultWindow;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
};

struct SyntheticCorpus {
  data::SegmentStore store;
  std::vector<UserProfile> profiles;
  /// Noise-free heart rate aligned with store.segments.
  std::vector<std::vector<double>> oracle_hr;
  std::size_t sessions = 0;
};

SyntheticCorpus generate_corpus(const CorpusConfig& config, const std::vector<DeviceTemplate>& devices);

}  // namespace pulse::synth
