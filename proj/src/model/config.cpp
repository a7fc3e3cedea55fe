#include "pulse/model/config.hpp"

#include <stdexcept>

namespace pulse::model {

nlohmann::json ModelConfig::to_json() const {
  return {{"channels", channels},
          {"hist",
           {{"depth", hist.depth},
            {"bilstm_hidden", hist.bilstm_hidden},
            {"gru_hidden", hist.gru_hidden},
            {"attn_heads", hist.attn_heads},
            {"time_dim", hist.time_dim},
            {"context_dim", hist.context_dim},
            {"pool", hist.pool}}},
          {"use_history", use_history},
          {"hidden", hidden},
          {"layers", layers},
          {"bidirectional", bidirectional},
          {"dropout", dropout},
          {"user_dim", user_dim},
          {"sport_dim", sport_dim},
          {"gender_dim", gender_dim},
          {"users", users},
          {"sports", sports},
          {"genders", genders}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.channels = j.at("channels");
  const auto& h = j.at("hist");
  c.hist.depth = h.at("depth");
  c.hist.bilstm_hidden = h.at("bilstm_hidden");
  c.hist.gru_hidden = h.at("gru_hidden");
  c.hist.attn_heads = h.at("attn_heads");
  c.hist.time_dim = h.at("time_dim");
  c.hist.context_dim = h.at("context_dim");
  c.hist.pool = h.at("pool");
  c.use_history = j.at("use_history");
  c.hidden = j.at("hidden");
  c.layers = j.at("layers");
  c.bidirectional = j.at("bidirectional");
  c.dropout = j.at("dropout");
  c.user_dim = j.at("user_dim");
  c.sport_dim = j.at("sport_dim");
  c.gender_dim = j.at("gender_dim");
  c.users = j.at("users");
  c.sports = j.at("sports");
  c.genders = j.at("genders");
  return c;
}

void ModelConfig::validate() const {
  if (channels == 0) throw std::invalid_argument("model: channel count must be positive");
  if (hidden == 0 || layers == 0) throw std::invalid_argument("model: hidden size and layer count must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model: dropout must lie in [0, 1)");
  if (hist.pool == 0) throw std::invalid_argument("hist.pool must be >= 1");
  if (use_history) {
    if (hist.attn_heads == 0 || hist.gru_hidden % hist.attn_heads != 0)
      throw std::invalid_argument("hist.attn_heads must divide hist.gru_hidden");
    if (hist.bilstm_hidden == 0 || hist.time_dim == 0 || hist.context_dim == 0 || hist.depth == 0)
      throw std::invalid_argument("history encoder sizes must be positive");
  }
}

}  // namespace pulse::model
