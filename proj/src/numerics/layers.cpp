#include "pulse/numerics/layers.hpp"

#include <cmath>

namespace pulse::num {

Tensor uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Tensor t({rows, cols});
  for (auto& v : t.storage()) v = uniform(rng, -bound, bound);
  return t;
}

LinearParams register_linear(ParameterStore& store, const std::string& prefix, std::size_t in,
                             std::size_t out, Rng& rng, bool bias) {
  LinearParams p;
  p.w = store.add(prefix + ".weight", uniform_init(out, in, rng));
  if (bias) p.b = store.add(prefix + ".bias", Tensor({1, out}));
  return p;
}

Var apply(Tape& tape, const ParameterStore& store, const LinearParams& p, Var x) {
  Var b = p.b == kNoParam ? Var{} : tape.param(store, p.b);
  return affine(x, tape.param(store, p.w), b);
}

LstmParams register_lstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                         std::size_t hidden, Rng& rng) {
  LstmParams p;
  p.wx = store.add(prefix + ".wx", uniform_init(4 * hidden, in, rng));
  p.wh = store.add(prefix + ".wh", uniform_init(4 * hidden, hidden, rng));
  Tensor b({1, 4 * hidden});
  for (std::size_t k = hidden; k < 2 * hidden; ++k) b[k] = 1.0;
  p.b = store.add(prefix + ".bias", std::move(b));
  return p;
}

LstmWeights bind(Tape& tape, const ParameterStore& store, const LstmParams& p) {
  return {tape.param(store, p.wx), tape.param(store, p.wh), tape.param(store, p.b)};
}

BiLstmParams register_bilstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                             std::size_t hidden, Rng& rng) {
  BiLstmParams p;
  p.fwd = register_lstm(store, prefix + ".fwd", in, hidden, rng);
  p.bwd = register_lstm(store, prefix + ".bwd", in, hidden, rng);
  return p;
}

GruParams register_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
                       std::size_t hidden, Rng& rng) {
  GruParams p;
  p.wx = store.add(prefix + ".wx", uniform_init(3 * hidden, in, rng));
  p.wh = store.add(prefix + ".wh", uniform_init(3 * hidden, hidden, rng));
  p.bx = store.add(prefix + ".bx", Tensor({1, 3 * hidden}));
  p.bh = store.add(prefix + ".bh", Tensor({1, 3 * hidden}));
  return p;
}

GruWeights bind(Tape& tape, const ParameterStore& store, const GruParams& p) {
  return {tape.param(store, p.wx), tape.param(store, p.wh), tape.param(store, p.bx),
          tape.param(store, p.bh)};
}

AttentionParams register_attention(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                   std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0)
    throw ShapeError("attention: " + std::to_string(heads) + " heads do not divide width " +
                     std::to_string(dim));
  AttentionParams p;
  p.q = register_linear(store, prefix + ".query", dim, dim, rng);
  p.k = register_linear(store, prefix + ".key", dim, dim, rng);
  p.v = register_linear(store, prefix + ".value", dim, dim, rng);
  p.o = register_linear(store, prefix + ".out", dim, dim, rng);
  p.heads = heads;
  return p;
}

AttentionWeights bind(Tape& tape, const ParameterStore& store, const AttentionParams& p) {
  auto w = [&](const LinearParams& l) { return tape.param(store, l.w); };
  auto b = [&](const LinearParams& l) { return tape.param(store, l.b); };
  return {w(p.q), b(p.q), w(p.k), b(p.k), w(p.v), b(p.v), w(p.o), b(p.o), p.heads};
}

FeedForwardParams register_feed_forward(ParameterStore& store, const std::string& prefix, std::size_t in,
                                        std::size_t hidden, std::size_t out, Rng& rng) {
  FeedForwardParams p;
  p.l1 = register_linear(store, prefix + ".l1", in, hidden, rng);
  p.l2 = register_linear(store, prefix + ".l2", hidden, out, rng);
  return p;
}

FeedForwardWeights bind(Tape& tape, const ParameterStore& store, const FeedForwardParams& p) {
  return {tape.param(store, p.l1.w), tape.param(store, p.l1.b), tape.param(store, p.l2.w),
          tape.param(store, p.l2.b)};
}

}  // namespace pulse::num
