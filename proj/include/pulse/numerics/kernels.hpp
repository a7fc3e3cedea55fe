#pragma once

#include <span>
#include <vector>

#include "pulse/numerics/ops.hpp"

namespace pulse::num {

/// LSTM weights bound to a tape. Gate order along the 4H axis: input,
/// forget, candidate, output.
struct LstmWeights {
  Var wx;  // 4H x in
  Var wh;  // 4H x H
  Var b;   // 1 x 4H
  std::size_t hidden() const { return wh.cols(); }
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_cell(Var x, Var h, Var c, const LstmWeights& w);

/// Runs the recurrence over the rows of `xs` (T x in) from a zero state and
/// returns every hidden state (T x H) in input order. With `reverse` the
/// recurrence starts at the last row.
Var lstm_sequence(Var xs, const LstmWeights& w, bool reverse = false);

/// Bidirectional layer: [forward states | backward states], T x 2H.
Var bilstm_sequence(Var xs, const LstmWeights& fwd, const LstmWeights& bwd);

/// Final states of a bidirectional output: forward state at the last row
/// joined with the backward state at the first row (1 x 2H).
Var bilstm_final(Var states, std::size_t hidden);

/// GRU weights; gate order along the 3H axis: reset, update, candidate.
struct GruWeights {
  Var wx;  // 3H x in
  Var wh;  // 3H x H
  Var bx;  // 1 x 3H
  Var bh;  // 1 x 3H
  std::size_t hidden() const { return wh.cols(); }
};

Var gru_cell(Var x, Var h, const GruWeights& w);

/// Applies the cell to each row of `xs` (N x in) starting from `h0`.
/// Rows with `mask[i] == false` carry the previous state through unchanged.
/// Returns N x H. With N == 0 the result is `h0` itself.
Var gru_sequence(Var xs, Var h0, const GruWeights& w, const std::vector<bool>* mask = nullptr);

struct AttentionWeights {
  Var wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t heads = 1;
};

struct AttentionOutput {
  Var output;
  /// weights[head][key]
  std::vector<std::vector<double>> weights;
};

/// Scaled dot-product attention of a single query row over N key/value rows,
/// split across `heads`, concatenated and projected.
AttentionOutput multi_head_attention(Var query, Var keys, Var values, const std::vector<bool>& mask,
                                     const AttentionWeights& w);

struct FeedForwardWeights {
  Var w1, b1, w2, b2;
};

/// affine -> GELU -> dropout (training only) -> affine, applied row-wise.
Var feed_forward(Var x, const FeedForwardWeights& w, double dropout_rate = 0.0, Rng* rng = nullptr,
                 bool training = false);

struct InfoNceResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d z, row-major B x d
  std::size_t positive_pairs = 0;
};

/// Supervised InfoNCE over a batch of raw embeddings (B x d). Rows are
/// l2-normalised, similarities divided by `temperature`, positives are all
/// ordered pairs sharing a group. A batch without positives scores 0.
InfoNceResult info_nce_eval(std::span<const double> z, std::size_t batch, std::size_t dim,
                            std::span<const int> groups, double temperature);

Var info_nce(Var z, const std::vector<int>& groups, double temperature);

}  // namespace pulse::num
