#include "pulse/model/model.hpp"

namespace pulse::model {

using namespace pulse::num;

Model::Model(const ModelConfig& config, std::uint64_t seed) : cfg_(config) {
  cfg_.validate();
  Rng rng(derive_seed(seed, {0x696e6974}));
  if (cfg_.use_history) hist_ = HistoryEncoder(store_, cfg_, rng);
  user_ = UserEncoder(store_, cfg_, rng);
}

ModelOutput Model::forward(Tape& tape, const ModelInput& in, bool training, Rng* rng) const {
  if (training && !rng) throw std::invalid_argument("model: training forward needs an rng");
  if (in.length == 0 || in.features.size() != in.length * cfg_.channels)
    throw ShapeError("model: input is not T x D");
  ModelOutput out;
  if (cfg_.use_history) {
    auto ctx = hist_.encode(tape, store_, in.history, training, rng);
    out.context = ctx.context;
    out.attention = std::move(ctx.weights);
  } else {
    out.context = tape.constant(1, cfg_.hist.context_dim, std::vector<double>(cfg_.hist.context_dim, 0.0));
  }
  Var x = tape.constant(in.length, cfg_.channels, in.features);
  auto enc = user_.encode_user(tape, store_, x, out.context, in.attributes);
  out.z = enc.z;
  out.prediction = user_.predict_hr(tape, store_, enc.states, training, rng);
  return out;
}

}  // namespace pulse::model
