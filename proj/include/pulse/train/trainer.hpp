#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/numerics/checkpoint.hpp"
#include "pulse/train/dataset.hpp"
#include "pulse/train/network.hpp"

namespace pulse::train {

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double clip = 2.0;
  std::size_t patience = 10;
  std::size_t max_epochs = 100;
  std::size_t max_batches = 0;  // per epoch, 0 = full pass
  double lambda = 0.1;
  double temperature = 0.1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;  // examples of a batch run in parallel; results do not depend on it
  bool no_dropout = false;
  bool no_tat = false;
  bool no_contrastive = false;
  featdrop::DropoutConfig dropout;  // main channels default to the registry's

  void validate() const;
  double effective_lambda() const { return no_contrastive ? 0.0 : lambda; }
  nlohmann::json to_json() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean over batches of mse + lambda * contrastive
  double mse = 0.0;       // normalised units
  double contrastive = 0.0;
  double val_mse = 0.0;  // bpm^2
  double val_mae = 0.0;  // bpm
  double dropout_p = 0.0;
  double seconds = 0.0;
  std::size_t batches = 0;
  std::size_t current_masks = 0;
  std::size_t history_masks = 0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  num::Checkpoint checkpoint;  // best validation epoch
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  std::string stop_reason;  // patience, max_epochs or diverged
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Fills data-dependent fields (channels, vocabulary sizes, history depth,
/// history switch) of a model configuration.
model::ModelConfig fit_model_config(model::ModelConfig base, const Dataset& data, const TrainConfig& config);

/// Batches of training examples, reshuffled per epoch. Examples of one
/// group are paired up so that most batches hold positives.
std::vector<std::vector<std::size_t>> pack_batches(const std::vector<std::size_t>& examples,
                                                   const std::vector<int>& groups, std::size_t batch_size,
                                                   Rng& rng);

/// Minimises mean MSE + lambda * InfoNCE with RMSProp and early stopping on
/// validation MSE. `net` ends up holding the best parameters.
TrainResult train(Network& net, const Dataset& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  std::vector<std::size_t> examples;
  std::vector<double> example_mse, example_mae;  // bpm
};

/// Heart rate in bpm for one example: no masks, no dropout.
std::vector<double> predict_bpm(const Network& net, const Dataset& data, std::size_t example);
Metrics evaluate(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                 std::size_t threads = 1);
/// z of every listed example, row-major.
std::vector<double> embed(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                          std::size_t threads = 1);

/// Per-user mean of the flattened training heart rate; unseen users get the
/// global training mean.
class UserMeanBaseline {
 public:
  static UserMeanBaseline fit(const data::SegmentStore& store, const std::vector<std::size_t>& train);
  double predict(const std::string& user) const;
  double global_mean() const { return global_; }
  Metrics evaluate(const Dataset& data, const std::vector<std::size_t>& examples) const;

 private:
  std::map<std::string, double> means_;
  double global_ = 0.0;
};

/// Checkpoint metadata shared by train and the loaders.
nlohmann::json checkpoint_meta(const Network& net, const Dataset& data, const TrainConfig& config);

/// A trained network with the data preparation it was fitted with.
struct LoadedModel {
  std::unique_ptr<Network> net;
  DataConfig data;
  data::Normalizer norm;
  data::Vocabularies vocab;
  data::ChannelRegistry registry;
  nlohmann::json meta;

  static LoadedModel load(const std::filesystem::path& path);
  static LoadedModel from_checkpoint(const num::Checkpoint& ckpt);
  /// Prepares a store with the fitted normalisation; every example is test.
  Dataset prepare(data::SegmentStore store) const;
};

}  // namespace pulse::train
