#include "pulse/model/userenc.hpp"

#include <algorithm>

namespace pulse::model {

using namespace pulse::num;

UserEncoder::UserEncoder(ParameterStore& store, const ModelConfig& c, Rng& rng) : cfg_(c) {
  auto table = [&](const std::string& path, std::size_t vocab, std::size_t dim) {
    Tensor t({vocab + 1, dim});
    for (auto& v : t.storage()) v = normal(rng, 0.0, 0.1);
    return store.add(path, std::move(t));
  };
  user_emb_ = table("user.emb.user", c.users, c.user_dim);
  sport_emb_ = table("user.emb.sport", c.sports, c.sport_dim);
  gender_emb_ = table("user.emb.gender", c.genders, c.gender_dim);
  // The context slot keeps its width when the history encoder is disabled.
  std::size_t in = c.channels + c.hist.context_dim + c.user_dim + c.sport_dim + c.gender_dim;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string prefix = "user.lstm" + std::to_string(l);
    BiLstmParams p;
    p.fwd = register_lstm(store, prefix + ".fwd", in, c.hidden, rng);
    if (c.bidirectional) p.bwd = register_lstm(store, prefix + ".bwd", in, c.hidden, rng);
    layers_.push_back(p);
    in = c.state_width();
  }
  head_ = register_feed_forward(store, "pred", c.state_width(), c.hidden, 1, rng);
}

Var UserEncoder::attribute_embedding(Tape& tape, const ParameterStore& store, const Attributes& a) const {
  auto lookup = [&](std::size_t table, std::size_t id, std::size_t vocab) {
    return row(tape.param(store, table), std::min(id, vocab));
  };
  return concat_cols({lookup(user_emb_, a.user, cfg_.users), lookup(sport_emb_, a.sport, cfg_.sports),
                      lookup(gender_emb_, a.gender, cfg_.genders)});
}

UserEncoding UserEncoder::encode_user(Tape& tape, const ParameterStore& store, Var features, Var context,
                                      const Attributes& a) const {
  if (features.cols() != cfg_.channels) throw ShapeError("encode_user: feature width differs from channel count");
  Var h = concat_cols({features, context, attribute_embedding(tape, store, a)});
  for (const auto& layer : layers_) {
    if (cfg_.bidirectional)
      h = bilstm_sequence(h, bind(tape, store, layer.fwd), bind(tape, store, layer.bwd));
    else
      h = lstm_sequence(h, bind(tape, store, layer.fwd));
  }
  Var z = cfg_.bidirectional ? bilstm_final(h, cfg_.hidden) : row(h, h.rows() - 1);
  return {h, z};
}

Var UserEncoder::predict_hr(Tape& tape, const ParameterStore& store, Var states, bool training, Rng* rng) const {
  Var h = states;
  if (training && cfg_.dropout > 0.0) h = dropout(h, cfg_.dropout, *rng, true);
  return feed_forward(h, bind(tape, store, head_));
}

}  // namespace pulse::model
