#include "pulse/model/histenc.hpp"

#include <cmath>
#include <stdexcept>

namespace pulse::model {

using namespace pulse::num;

std::vector<double> pool_rows(const std::vector<double>& m, std::size_t rows, std::size_t cols, std::size_t factor) {
  if (factor <= 1) return m;
  const std::size_t out_rows = rows / factor;
  std::vector<double> out(out_rows * cols, 0.0);
  const double inv = 1.0 / static_cast<double>(factor);
  for (std::size_t r = 0; r < out_rows; ++r)
    for (std::size_t k = 0; k < factor; ++k)
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += m[(r * factor + k) * cols + c] * inv;
  return out;
}

HistoryEncoder::HistoryEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng)
    : cfg_(config.hist), channels_(config.channels), dropout_(config.dropout) {
  const auto& h = cfg_;
  time_ = register_linear(store, "hist.time", 1, h.time_dim, rng);
  feat_ = register_bilstm(store, "hist.feat", channels_ + h.time_dim, h.bilstm_hidden, rng);
  hr_ = register_bilstm(store, "hist.hr", 1 + h.time_dim, h.bilstm_hidden, rng);
  gru_ = register_gru(store, "hist.gru", 4 * h.bilstm_hidden, h.gru_hidden, rng);
  attn_ = register_attention(store, "hist.attn", h.gru_hidden, h.attn_heads, rng);
  fuse_ = register_feed_forward(store, "hist.fuse", 2 * h.gru_hidden, h.context_dim, h.context_dim, rng);
  default_ = store.add("hist.default_context", Tensor({1, h.context_dim}));
}

Var HistoryEncoder::embed_gap(Tape& tape, const ParameterStore& store, double gap) const {
  if (!(gap >= 0.0)) throw std::invalid_argument("embed_gap: gap must be nonnegative");
  return tanh(apply(tape, store, time_, tape.constant(1, 1, {std::log1p(gap)})));
}

Var HistoryEncoder::encode_workout(Tape& tape, const ParameterStore& store, const HistoryItem& item,
                                   Var time_embedding) const {
  if (item.length == 0) throw std::invalid_argument("encode_workout: empty workout");
  if (item.features.size() != item.length * channels_ || item.hr.size() != item.length)
    throw ShapeError("encode_workout: workout does not match the channel count");
  const std::size_t factor = std::min(cfg_.pool, item.length);
  const std::size_t T = item.length / factor;
  Var x = tape.constant(T, channels_, pool_rows(item.features, item.length, channels_, factor));
  Var y = tape.constant(T, 1, pool_rows(item.hr, item.length, 1, factor));
  const std::size_t H = cfg_.bilstm_hidden;
  Var feat = bilstm_sequence(concat_cols({x, time_embedding}), bind(tape, store, feat_.fwd), bind(tape, store, feat_.bwd));
  Var hr = bilstm_sequence(concat_cols({y, time_embedding}), bind(tape, store, hr_.fwd), bind(tape, store, hr_.bwd));
  return concat_cols({bilstm_final(feat, H), bilstm_final(hr, H)});
}

Var HistoryEncoder::encode_history(Tape& tape, const ParameterStore& store, Var summaries,
                                   const std::vector<bool>& mask) const {
  Var h0 = tape.constant(1, cfg_.gru_hidden, std::vector<double>(cfg_.gru_hidden, 0.0));
  return gru_sequence(summaries, h0, bind(tape, store, gru_), &mask);
}

ContextResult HistoryEncoder::fuse_context(Tape& tape, const ParameterStore& store, Var contexts,
                                           const std::vector<bool>& mask, bool training, Rng* rng) const {
  const std::size_t N = contexts.rows();
  if (N == 0) throw std::invalid_argument("fuse_context: no context vectors");
  Var last = row(contexts, N - 1);
  auto att = multi_head_attention(last, contexts, contexts, mask, bind(tape, store, attn_));
  Var u = feed_forward(concat_cols({last, att.output}), bind(tape, store, fuse_), dropout_, rng, training);
  return {u, std::move(att.weights)};
}

Var HistoryEncoder::default_context(Tape& tape, const ParameterStore& store) const {
  return tape.param(store, default_);
}

ContextResult HistoryEncoder::encode(Tape& tape, const ParameterStore& store, const std::vector<HistoryItem>& history,
                                     bool training, Rng* rng) const {
  if (history.empty()) return {default_context(tape, store), {}};
  const std::size_t n = std::min(history.size(), cfg_.depth);
  const std::size_t pad = cfg_.depth - n;
  const std::size_t W = 4 * cfg_.bilstm_hidden;
  std::vector<Var> rows;
  std::vector<bool> mask(cfg_.depth, false);
  Var blank = tape.constant(1, W, std::vector<double>(W, 0.0));
  for (std::size_t i = 0; i < pad; ++i) rows.push_back(blank);
  for (std::size_t i = history.size() - n; i < history.size(); ++i) {
    const auto& item = history[i];
    rows.push_back(encode_workout(tape, store, item, embed_gap(tape, store, item.gap)));
    mask[rows.size() - 1] = true;
  }
  Var contexts = encode_history(tape, store, concat_rows(rows), mask);
  return fuse_context(tape, store, contexts, mask, training, rng);
}

}  // namespace pulse::model
