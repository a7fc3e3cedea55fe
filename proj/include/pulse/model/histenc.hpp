#pragma once

#include <string>
#include <vector>

#include "pulse/model/config.hpp"
#include "pulse/numerics/layers.hpp"

namespace pulse::model {

/// One past workout as the history encoder sees it.
struct HistoryItem {
  std::vector<double> features;  // T x D, time-major, normalised and masked
  std::vector<double> hr;        // T, normalised
  std::size_t length = 0;
  double gap = 0.0;              // seconds since the previous workout ended
};

struct ContextResult {
  num::Var context;                          // 1 x context_dim
  std::vector<std::vector<double>> weights;  // [head][slot]; empty for the default context
};

/// Time-aware attention over a user's recent workouts.
class HistoryEncoder {
 public:
  HistoryEncoder() = default;
  HistoryEncoder(num::ParameterStore& store, const ModelConfig& config, Rng& rng);

  /// tanh(W log(1 + gap) + b); throws on negative gaps.
  num::Var embed_gap(num::Tape& tape, const num::ParameterStore& store, double gap) const;
  /// [feature-stream BiLSTM final ; hr-stream BiLSTM final], 1 x 4H.
  num::Var encode_workout(num::Tape& tape, const num::ParameterStore& store, const HistoryItem& item,
                          num::Var time_embedding) const;
  /// GRU over summaries (N x 4H) with a slot mask; returns N x G.
  num::Var encode_history(num::Tape& tape, const num::ParameterStore& store, num::Var summaries,
                          const std::vector<bool>& mask) const;
  /// Attention with the last context as query, then FFN([c_N ; a]).
  ContextResult fuse_context(num::Tape& tape, const num::ParameterStore& store, num::Var contexts,
                             const std::vector<bool>& mask, bool training, Rng* rng) const;
  num::Var default_context(num::Tape& tape, const num::ParameterStore& store) const;

  /// Whole pipeline. Histories are left-padded to `depth` slots; an empty
  /// history yields the learned default context.
  ContextResult encode(num::Tape& tape, const num::ParameterStore& store, const std::vector<HistoryItem>& history,
                       bool training, Rng* rng) const;

  const HistoryConfig& config() const { return cfg_; }

 private:
  HistoryConfig cfg_;
  std::size_t channels_ = 0;
  double dropout_ = 0.0;
  num::LinearParams time_;
  num::BiLstmParams feat_, hr_;
  num::GruParams gru_;
  num::AttentionParams attn_;
  num::FeedForwardParams fuse_;
  std::size_t default_ = num::kNoParam;
};

/// Block-average of a T x W time-major matrix; trailing rows are dropped.
std::vector<double> pool_rows(const std::vector<double>& m, std::size_t rows, std::size_t cols, std::size_t factor);

}  // namespace pulse::model
