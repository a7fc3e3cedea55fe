#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pulse/data/examples.hpp"
#include "pulse/data/store.hpp"
#include "pulse/featdrop/featdrop.hpp"
#include "pulse/model/model.hpp"

namespace pulse::train {

struct DataConfig {
  std::size_t history_depth = data::kDefaultHistoryDepth;
  data::GroupMode group = data::GroupMode::user_sport;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  bool split_by_session = false;
  std::uint64_t split_seed = 1;

  nlohmann::json to_json() const;
  static DataConfig from_json(const nlohmann::json& j);
};

/// A segment store prepared for learning: examples, split, normalisation
/// and vocabularies (both fitted on the training part), and cached
/// normalised matrices.
struct Dataset {
  data::SegmentStore store;
  DataConfig config;
  data::ExampleSet examples;
  data::Split split;
  data::Normalizer norm;
  data::Vocabularies vocab;
  std::vector<std::vector<double>> features;  // per segment, T x D time-major
  std::vector<std::vector<double>> hr;        // per segment, normalised
  std::vector<model::Attributes> attributes;  // per segment

  /// Splits and fits normalisation/vocabularies on the training part.
  static Dataset build(data::SegmentStore store, const DataConfig& config);
  /// Uses the given normalisation and vocabularies (inference on new data).
  /// Every example lands in the test part.
  static Dataset with_fitted(data::SegmentStore store, const DataConfig& config, const data::Normalizer& norm,
                             const data::Vocabularies& vocab);

  std::size_t channels() const { return store.registry.size(); }
  std::size_t size() const { return examples.examples.size(); }

  struct MaskCounts {
    std::size_t current = 0;
    std::size_t history = 0;
  };

  /// Model input for one example. With `dropout` set, every segment of the
  /// example (current and history) gets its own freshly sampled mask.
  model::ModelInput input(std::size_t example, const featdrop::DropoutConfig* dropout = nullptr, double p = 0.0,
                          Rng* rng = nullptr, MaskCounts* counts = nullptr) const;
};

/// The segment-level split `Dataset::build` uses.
data::Split split_for(const data::SegmentStore& store, const DataConfig& config);

model::Attributes attributes_for(const data::Segment& s, const data::Vocabularies& vocab);

}  // namespace pulse::train
