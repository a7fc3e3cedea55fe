#pragma once

#include <memory>

#include <json.hpp>

#include "pulse/model/model.hpp"

namespace pulse::train {

struct Forward {
  num::Var prediction;  // T x 1, normalised heart rate
  num::Var z;           // 1 x d user embedding; invalid when the network has none
};

/// Anything the trainer can fit: a parameter store and a forward pass over
/// one example.
class Network {
 public:
  virtual ~Network() = default;
  virtual Forward forward(num::Tape& tape, const model::ModelInput& input, bool training, Rng* rng) const = 0;
  virtual num::ParameterStore& params() = 0;
  virtual const num::ParameterStore& params() const = 0;
  /// {"kind": ..., "config": ...}; enough for make_network to rebuild it.
  virtual nlohmann::json describe() const = 0;
};

class ModelNetwork final : public Network {
 public:
  ModelNetwork(const model::ModelConfig& config, std::uint64_t seed) : model_(config, seed) {}

  Forward forward(num::Tape& tape, const model::ModelInput& input, bool training, Rng* rng) const override;
  num::ParameterStore& params() override { return model_.params(); }
  const num::ParameterStore& params() const override { return model_.params(); }
  nlohmann::json describe() const override;

  const model::Model& model() const { return model_; }

 private:
  model::Model model_;
};

/// Per-timestep MLP with two hidden layers over
/// [x_t ; attribute embeddings ; summary of the previous workout].
/// The summary is the per-channel mean, min and max plus the mean heart
/// rate of the most recent history segment (zeros without history).
class MlpNetwork final : public Network {
 public:
  MlpNetwork(const model::ModelConfig& config, std::uint64_t seed);

  Forward forward(num::Tape& tape, const model::ModelInput& input, bool training, Rng* rng) const override;
  num::ParameterStore& params() override { return store_; }
  const num::ParameterStore& params() const override { return store_; }
  nlohmann::json describe() const override;

  static std::vector<double> previous_summary(const model::ModelInput& input, std::size_t channels);

 private:
  model::ModelConfig cfg_;
  num::ParameterStore store_;
  std::size_t user_emb_ = num::kNoParam, sport_emb_ = num::kNoParam, gender_emb_ = num::kNoParam;
  num::LinearParams l1_, l2_, out_;
};

std::unique_ptr<Network> make_network(const nlohmann::json& description, std::uint64_t seed = 0);

}  // namespace pulse::train
