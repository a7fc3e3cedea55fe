#pragma once

#include <cstddef>

#include <json.hpp>

namespace pulse::model {

struct HistoryConfig {
  std::size_t depth = 10;
  std::size_t bilstm_hidden = 64;
  std::size_t gru_hidden = 128;
  std::size_t attn_heads = 4;
  std::size_t time_dim = 16;
  std::size_t context_dim = 128;
  /// Average-pool history workouts over blocks of this many steps before
  /// their BiLSTMs (1 = no pooling).
  std::size_t pool = 1;
};

struct ModelConfig {
  std::size_t channels = 0;  // D
  HistoryConfig hist;
  bool use_history = true;   // false removes the history encoder entirely
  std::size_t hidden = 128;
  std::size_t layers = 2;
  bool bidirectional = true;
  double dropout = 0.2;
  std::size_t user_dim = 16, sport_dim = 8, gender_dim = 2;
  std::size_t users = 0, sports = 0, genders = 0;  // vocabulary sizes (an unknown row is added)

  std::size_t state_width() const { return bidirectional ? 2 * hidden : hidden; }
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

}  // namespace pulse::model
