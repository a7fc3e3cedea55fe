#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace pulse::data {

struct Channel {
  std::string name;
  std::string unit;
};

/// Ordered global channel space. Heart rate is the prediction target and is
/// not a channel.
class ChannelRegistry {
 public:
  ChannelRegistry() = default;
  ChannelRegistry(std::vector<Channel> channels, const std::vector<std::string>& main);

  /// The full cross-vendor channel list, main = {speed, altitude}.
  static ChannelRegistry standard();

  std::size_t size() const { return channels_.size(); }
  const Channel& at(std::size_t i) const { return channels_.at(i); }
  const std::string& name(std::size_t i) const { return channels_.at(i).name; }
  const std::string& unit(std::size_t i) const { return channels_.at(i).unit; }
  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws std::out_of_range naming the channel.
  std::size_t index(std::string_view name) const;

  const std::vector<std::size_t>& main() const { return main_; }
  bool is_main(std::size_t i) const;
  void set_main(const std::vector<std::string>& names);
  std::vector<std::string> main_names() const;

  nlohmann::json to_json() const;
  static ChannelRegistry from_json(const nlohmann::json& j);

  friend bool operator==(const ChannelRegistry& a, const ChannelRegistry& b) {
    return a.names() == b.names() && a.main_ == b.main_;
  }
  std::vector<std::string> names() const;

 private:
  std::vector<Channel> channels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> main_;
};

/// Dense id assignment for a categorical attribute, in insertion order.
class Vocabulary {
 public:
  std::size_t add(const std::string& token);
  std::optional<std::size_t> find(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const { return tokens_; }
  static Vocabulary from_json(const nlohmann::json& j);
  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace pulse::data
