#include "pulse/train/network.hpp"

#include <algorithm>
#include <limits>

namespace pulse::train {

using namespace pulse::num;

Forward ModelNetwork::forward(Tape& tape, const model::ModelInput& input, bool training, Rng* rng) const {
  auto out = model_.forward(tape, input, training, rng);
  return {out.prediction, out.z};
}

nlohmann::json ModelNetwork::describe() const { return {{"kind", "model"}, {"config", model_.config().to_json()}}; }

MlpNetwork::MlpNetwork(const model::ModelConfig& config, std::uint64_t seed) : cfg_(config) {
  cfg_.validate();
  Rng rng(derive_seed(seed, {0x6d6c70}));
  auto table = [&](const std::string& path, std::size_t vocab, std::size_t dim) {
    Tensor t({vocab + 1, dim});
    for (auto& v : t.storage()) v = normal(rng, 0.0, 0.1);
    return store_.add(path, std::move(t));
  };
  user_emb_ = table("mlp.emb.user", cfg_.users, cfg_.user_dim);
  sport_emb_ = table("mlp.emb.sport", cfg_.sports, cfg_.sport_dim);
  gender_emb_ = table("mlp.emb.gender", cfg_.genders, cfg_.gender_dim);
  const std::size_t in =
      cfg_.channels + cfg_.user_dim + cfg_.sport_dim + cfg_.gender_dim + 3 * cfg_.channels + 1;
  l1_ = register_linear(store_, "mlp.l1", in, cfg_.hidden, rng);
  l2_ = register_linear(store_, "mlp.l2", cfg_.hidden, cfg_.hidden, rng);
  out_.w = store_.add("mlp.out.weight", Tensor({1, cfg_.hidden}));
  out_.b = store_.add("mlp.out.bias", Tensor({1, 1}));
}

std::vector<double> MlpNetwork::previous_summary(const model::ModelInput& input, std::size_t D) {
  std::vector<double> s(3 * D + 1, 0.0);
  if (input.history.empty()) return s;
  const auto& h = input.history.back();
  const std::size_t T = h.length;
  if (T == 0) return s;
  for (std::size_t d = 0; d < D; ++d) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t t = 0; t < T; ++t) {
      const double v = h.features[t * D + d];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s[d] = sum / static_cast<double>(T);
    s[D + d] = lo;
    s[2 * D + d] = hi;
  }
  double hr = 0.0;
  for (std::size_t t = 0; t < T; ++t) hr += h.hr[t];
  s[3 * D] = hr / static_cast<double>(T);
  return s;
}

Forward MlpNetwork::forward(Tape& tape, const model::ModelInput& input, bool training, Rng* rng) const {
  if (input.length == 0 || input.features.size() != input.length * cfg_.channels)
    throw ShapeError("mlp: input is not T x D");
  auto lookup = [&](std::size_t table, std::size_t id, std::size_t vocab) {
    return row(tape.param(store_, table), std::min(id, vocab));
  };
  const auto& a = input.attributes;
  Var x = tape.constant(input.length, cfg_.channels, input.features);
  Var summary = tape.constant(1, 3 * cfg_.channels + 1, previous_summary(input, cfg_.channels));
  Var h = concat_cols({x, lookup(user_emb_, a.user, cfg_.users), lookup(sport_emb_, a.sport, cfg_.sports),
                       lookup(gender_emb_, a.gender, cfg_.genders), summary});
  h = gelu(apply(tape, store_, l1_, h));
  h = gelu(apply(tape, store_, l2_, h));
  if (training && cfg_.dropout > 0.0) h = dropout(h, cfg_.dropout, *rng, true);
  return {apply(tape, store_, out_, h), {}};
}

nlohmann::json MlpNetwork::describe() const { return {{"kind", "mlp"}, {"config", cfg_.to_json()}}; }

std::unique_ptr<Network> make_network(const nlohmann::json& description, std::uint64_t seed) {
  const auto kind = description.at("kind").get<std::string>();
  const auto config = model::ModelConfig::from_json(description.at("config"));
  if (kind == "model") return std::make_unique<ModelNetwork>(config, seed);
  if (kind == "mlp") return std::make_unique<MlpNetwork>(config, seed);
  throw std::invalid_argument("unknown network kind '" + kind + "'");
}

}  // namespace pulse::train
