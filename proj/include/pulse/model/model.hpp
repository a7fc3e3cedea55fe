#pragma once

#include <vector>

#include "pulse/model/histenc.hpp"
#include "pulse/model/userenc.hpp"

namespace pulse::model {

struct ModelInput {
  std::vector<double> features;  // T x D, time-major
  std::size_t length = 0;
  Attributes attributes;
  std::vector<HistoryItem> history;  // chronological
};

struct ModelOutput {
  num::Var prediction;  // T x 1, normalised heart rate
  num::Var z;           // 1 x state_width
  num::Var context;     // 1 x context_dim
  std::vector<std::vector<double>> attention;
};

/// History encoder + user encoder + predictor sharing one parameter store.
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);

  ModelOutput forward(num::Tape& tape, const ModelInput& input, bool training, Rng* rng) const;

  const ModelConfig& config() const { return cfg_; }
  num::ParameterStore& params() { return store_; }
  const num::ParameterStore& params() const { return store_; }
  /// Replaces parameter values, e.g. from a checkpoint.
  void load_parameters(const num::ParameterStore& values) { num::copy_values(store_, values); }
  /// Scalars owned by the history encoder (0 when it is disabled).
  std::size_t history_parameter_count() const { return store_.scalar_count("hist."); }

 private:
  ModelConfig cfg_;
  num::ParameterStore store_;
  HistoryEncoder hist_;
  UserEncoder user_;
};

}  // namespace pulse::model
