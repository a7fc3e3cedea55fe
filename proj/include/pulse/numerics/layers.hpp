#pragma once

#include <limits>
#include <string>

#include "pulse/numerics/kernels.hpp"

namespace pulse::num {

inline constexpr std::size_t kNoParam = std::numeric_limits<std::size_t>::max();

/// Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor uniform_init(std::size_t rows, std::size_t cols, Rng& rng);

struct LinearParams {
  std::size_t w = kNoParam;  // out x in
  std::size_t b = kNoParam;  // 1 x out, optional
};
LinearParams register_linear(ParameterStore& store, const std::string& prefix, std::size_t in,
                             std::size_t out, Rng& rng, bool bias = true);
Var apply(Tape& tape, const ParameterStore& store, const LinearParams& p, Var x);

struct LstmParams {
  std::size_t wx = kNoParam, wh = kNoParam, b = kNoParam;
};
/// Forget-gate bias starts at 1, other biases at 0.
LstmParams register_lstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                         std::size_t hidden, Rng& rng);
LstmWeights bind(Tape& tape, const ParameterStore& store, const LstmParams& p);

struct BiLstmParams {
  LstmParams fwd, bwd;
};
BiLstmParams register_bilstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                             std::size_t hidden, Rng& rng);

struct GruParams {
  std::size_t wx = kNoParam, wh = kNoParam, bx = kNoParam, bh = kNoParam;
};
GruParams register_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
                       std::size_t hidden, Rng& rng);
GruWeights bind(Tape& tape, const ParameterStore& store, const GruParams& p);

struct AttentionParams {
  LinearParams q, k, v, o;
  std::size_t heads = 1;
};
AttentionParams register_attention(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                   std::size_t heads, Rng& rng);
AttentionWeights bind(Tape& tape, const ParameterStore& store, const AttentionParams& p);

struct FeedForwardParams {
  LinearParams l1, l2;
};
FeedForwardParams register_feed_forward(ParameterStore& store, const std::string& prefix, std::size_t in,
                                        std::size_t hidden, std::size_t out, Rng& rng);
FeedForwardWeights bind(Tape& tape, const ParameterStore& store, const FeedForwardParams& p);

}  // namespace pulse::num
