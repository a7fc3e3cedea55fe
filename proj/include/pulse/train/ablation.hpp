#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse/train/trainer.hpp"

namespace pulse::train {

/// full, no_dropout, no_tat, no_contrastive
const std::vector<std::string>& ablation_variants();
TrainConfig apply_variant(TrainConfig config, const std::string& variant);

struct AblationRun {
  std::string variant;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double mse = 0.0, mae = 0.0;  // test, bpm
  double silhouette = 0.0;      // of test-set z, labelled by user
  double contrastive = 0.0;     // training contrastive loss at the best epoch
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
};

struct AblationRow {
  std::string variant;
  std::size_t runs = 0, failures = 0;
  double mse_mean = 0.0, mse_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
  double silhouette_mean = 0.0, silhouette_std = 0.0;
  double contrastive_mean = 0.0;
};

struct AblationReport {
  std::vector<AblationRun> runs;
  std::vector<AblationRow> rows;  // one per variant, in variant order

  const AblationRow& row(const std::string& variant) const;
  std::string render() const;
  nlohmann::json to_json() const;
};

/// Silhouette of z over the given examples with user labels.
double user_silhouette(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                       std::size_t threads = 1);

/// Trains every variant once per seed (the seed drives both initialisation
/// and training). A failing run is recorded and the others continue.
AblationReport run_ablation(const Dataset& data, const nlohmann::json& network, const TrainConfig& base,
                            const std::vector<std::uint64_t>& seeds,
                            const std::function<void(const AblationRun&)>& on_run = {});

}  // namespace pulse::train
