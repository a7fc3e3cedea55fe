#include "pulse/data/registry.hpp"

#include <algorithm>
#include <stdexcept>

namespace pulse::data {

ChannelRegistry::ChannelRegistry(std::vector<Channel> channels, const std::vector<std::string>& main)
    : channels_(std::move(channels)) {
  for (std::size_t i = 0; i < channels_.size(); ++i)
    if (!index_.emplace(channels_[i].name, i).second)
      throw std::invalid_argument("registry: duplicate channel " + channels_[i].name);
  set_main(main);
}

ChannelRegistry ChannelRegistry::standard() {
  return ChannelRegistry(
      {
          {"time_offset", "s"},
          {"lap_index", "1"},
          {"distance", "m"},
          {"speed", "m/s"},
          {"enhanced_speed", "m/s"},
          {"grade_adjusted_speed", "m/s"},
          {"effort_pace", "m/s"},
          {"longitude", "deg"},
          {"latitude", "deg"},
          {"altitude", "m"},
          {"power", "W"},
          {"accumulated_power", "W"},
          {"estimated_power", "W"},
          {"torque", "N*m"},
          {"energy", "kJ"},
          {"vo2max", "mL/kg/min"},
          {"body_battery", "1"},
          {"stress", "1"},
          {"cadence", "spm"},
          {"stride_length", "m"},
          {"vertical_oscillation", "mm"},
          {"stance_time", "ms"},
          {"fractional_cadence", "1"},
          {"vertical_ratio", "%"},
          {"cycle_length", "m"},
          {"leg_spring_stiffness", "kN/m"},
          {"performance_condition", "1"},
          {"form_power", "W"},
          {"stroke_rate", "spm"},
          {"total_swim_cycles", "1"},
          {"temperature", "degC"},
          {"steps", "1"},
      },
      {"speed", "altitude"});
}

std::optional<std::size_t> ChannelRegistry::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ChannelRegistry::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw std::out_of_range("unknown channel '" + std::string(name) + "'");
}

bool ChannelRegistry::is_main(std::size_t i) const {
  return std::find(main_.begin(), main_.end(), i) != main_.end();
}

void ChannelRegistry::set_main(const std::vector<std::string>& names) {
  std::vector<std::size_t> m;
  for (const auto& n : names) {
    const auto i = index(n);
    if (std::find(m.begin(), m.end(), i) == m.end()) m.push_back(i);
  }
  std::sort(m.begin(), m.end());
  main_ = std::move(m);
}

std::vector<std::string> ChannelRegistry::main_names() const {
  std::vector<std::string> out;
  for (auto i : main_) out.push_back(name(i));
  return out;
}

std::vector<std::string> ChannelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& c : channels_) out.push_back(c.name);
  return out;
}

nlohmann::json ChannelRegistry::to_json() const {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : channels_) ch.push_back({{"name", c.name}, {"unit", c.unit}});
  return {{"channels", ch}, {"main", main_names()}};
}

ChannelRegistry ChannelRegistry::from_json(const nlohmann::json& j) {
  std::vector<Channel> ch;
  for (const auto& c : j.at("channels")) ch.push_back({c.at("name").get<std::string>(), c.at("unit").get<std::string>()});
  return ChannelRegistry(std::move(ch), j.at("main").get<std::vector<std::string>>());
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  for (const auto& t : j) {
    const auto s = t.get<std::string>();
    if (v.find(s)) throw std::invalid_argument("vocabulary: duplicate token " + s);
    v.add(s);
  }
  return v;
}

}  // namespace pulse::data
