#include "pulse/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

#include "pulse/numerics/optim.hpp"
#include "pulse/util/parallel.hpp"

namespace pulse::train {

using namespace pulse::num;

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kMaskStream = 0x6d61736b;
constexpr std::uint64_t kDropStream = 0x64726f70;

nlohmann::json dropout_json(const featdrop::DropoutConfig& d) {
  return {{"p_min", d.p_min}, {"p_max", d.p_max}, {"epochs", d.epochs}, {"min_keep", d.min_keep}, {"main", d.main}};
}

double example_mse(std::span<const double> pred, const std::vector<double>& target) {
  double s = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) s += (pred[t] - target[t]) * (pred[t] - target[t]);
  return s / static_cast<double>(target.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!(clip > 0.0)) throw std::invalid_argument("train: clip must be positive");
  if (patience == 0) throw std::invalid_argument("train: patience must be positive");
  if (max_epochs == 0) throw std::invalid_argument("train: max_epochs must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("train: lambda must be >= 0");
  if (!(temperature > 0.0)) throw std::invalid_argument("train: temperature must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"clip", clip},
          {"patience", patience},
          {"max_epochs", max_epochs},
          {"max_batches", max_batches},
          {"lambda", lambda},
          {"temperature", temperature},
          {"seed", seed},
          {"no_dropout", no_dropout},
          {"no_tat", no_tat},
          {"no_contrastive", no_contrastive},
          {"dropout", dropout_json(dropout)}};
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"loss", loss},
          {"mse", mse},
          {"contrastive", contrastive},
          {"val_mse", val_mse},
          {"val_mae", val_mae},
          {"dropout_p", dropout_p},
          {"seconds", seconds},
          {"batches", batches},
          {"current_masks", current_masks},
          {"history_masks", history_masks}};
}

model::ModelConfig fit_model_config(model::ModelConfig c, const Dataset& data, const TrainConfig& config) {
  c.channels = data.channels();
  c.users = data.vocab.user.size();
  c.sports = data.vocab.sport.size();
  c.genders = data.vocab.gender.size();
  c.hist.depth = data.config.history_depth;
  c.use_history = !config.no_tat;
  c.validate();
  return c;
}

std::vector<std::vector<std::size_t>> pack_batches(const std::vector<std::size_t>& examples,
                                                   const std::vector<int>& groups, std::size_t batch_size,
                                                   Rng& rng) {
  std::vector<std::size_t> order = examples;
  std::shuffle(order.begin(), order.end(), rng);
  // Group members in shuffled order, groups in order of first appearance.
  std::vector<std::vector<std::size_t>> members;
  std::map<int, std::size_t> slot;
  for (auto e : order) {
    auto [it, fresh] = slot.try_emplace(groups.at(e), members.size());
    if (fresh) members.emplace_back();
    members[it->second].push_back(e);
  }
  std::vector<std::vector<std::size_t>> units;
  for (const auto& m : members)
    for (std::size_t i = 0; i < m.size(); i += 2) units.emplace_back(m.begin() + i, m.begin() + std::min(i + 2, m.size()));
  std::shuffle(units.begin(), units.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> cur;
  for (const auto& u : units)
    for (auto e : u) {
      cur.push_back(e);
      if (cur.size() == batch_size) batches.push_back(std::exchange(cur, {}));
    }
  if (!cur.empty()) batches.push_back(std::move(cur));
  return batches;
}

std::vector<double> predict_bpm(const Network& net, const Dataset& data, std::size_t example) {
  Tape tape;
  auto out = net.forward(tape, data.input(example), false, nullptr);
  std::vector<double> y(out.prediction.value().begin(), out.prediction.value().end());
  for (auto& v : y) v = data.norm.denormalize_hr(v);
  return y;
}

Metrics evaluate(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                 std::size_t threads) {
  Metrics m;
  m.examples = examples;
  m.example_mse.resize(examples.size());
  m.example_mae.resize(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    const auto y = predict_bpm(net, data, examples[i]);
    const auto& hr = data.store.segments[data.examples.examples[examples[i]].current].hr;
    double se = 0.0, ae = 0.0;
    for (std::size_t t = 0; t < hr.size(); ++t) {
      se += (y[t] - hr[t]) * (y[t] - hr[t]);
      ae += std::abs(y[t] - hr[t]);
    }
    m.example_mse[i] = se / static_cast<double>(hr.size());
    m.example_mae[i] = ae / static_cast<double>(hr.size());
  });
  for (std::size_t i = 0; i < examples.size(); ++i) {
    m.mse += m.example_mse[i];
    m.mae += m.example_mae[i];
  }
  if (!examples.empty()) {
    m.mse /= static_cast<double>(examples.size());
    m.mae /= static_cast<double>(examples.size());
  }
  return m;
}

std::vector<double> embed(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                          std::size_t threads) {
  std::vector<std::vector<double>> rows(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    Tape tape;
    auto out = net.forward(tape, data.input(examples[i]), false, nullptr);
    if (!out.z.valid()) throw std::invalid_argument("embed: network has no user embedding");
    rows[i].assign(out.z.value().begin(), out.z.value().end());
  });
  std::vector<double> z;
  for (const auto& r : rows) z.insert(z.end(), r.begin(), r.end());
  return z;
}

UserMeanBaseline UserMeanBaseline::fit(const data::SegmentStore& store, const std::vector<std::size_t>& train) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  std::size_t count = 0;
  for (auto i : train) {
    const auto& s = store.segments.at(i);
    auto& [sum, n] = acc[s.user_id];
    for (double v : s.hr) {
      sum += v;
      total += v;
    }
    n += s.hr.size();
    count += s.hr.size();
  }
  if (count == 0) throw std::invalid_argument("user-mean: no training heart rate");
  UserMeanBaseline b;
  b.global_ = total / static_cast<double>(count);
  for (const auto& [user, sn] : acc) b.means_[user] = sn.first / static_cast<double>(sn.second);
  return b;
}

double UserMeanBaseline::predict(const std::string& user) const {
  auto it = means_.find(user);
  return it == means_.end() ? global_ : it->second;
}

Metrics UserMeanBaseline::evaluate(const Dataset& data, const std::vector<std::size_t>& examples) const {
  Metrics m;
  m.examples = examples;
  for (auto e : examples) {
    const auto& s = data.store.segments[data.examples.examples[e].current];
    const double y = predict(s.user_id);
    double se = 0.0, ae = 0.0;
    for (double v : s.hr) {
      se += (y - v) * (y - v);
      ae += std::abs(y - v);
    }
    m.example_mse.push_back(se / static_cast<double>(s.hr.size()));
    m.example_mae.push_back(ae / static_cast<double>(s.hr.size()));
    m.mse += m.example_mse.back();
    m.mae += m.example_mae.back();
  }
  if (!examples.empty()) {
    m.mse /= static_cast<double>(examples.size());
    m.mae /= static_cast<double>(examples.size());
  }
  return m;
}

nlohmann::json checkpoint_meta(const Network& net, const Dataset& data, const TrainConfig& config) {
  return {{"network", net.describe()},
          {"train", config.to_json()},
          {"data", data.config.to_json()},
          {"normalizer", data.norm.to_json()},
          {"vocab", data.vocab.to_json()},
          {"registry", data.store.registry.to_json()}};
}

TrainResult train(Network& net, const Dataset& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.split.train.empty() || data.split.val.empty())
    throw std::invalid_argument("train: need nonempty train and validation splits");
  featdrop::DropoutConfig dropout = config.dropout;
  if (dropout.main.empty()) dropout.main = data.store.registry.main();
  dropout.validate(data.channels());
  const double lambda = config.effective_lambda();

  std::vector<int> groups;
  for (const auto& e : data.examples.examples) groups.push_back(e.group);

  ParameterStore& store = net.params();
  RmsProp optim(store, {config.learning_rate, 0.99, 1e-8, config.clip});
  TrainResult result;
  ParameterStore best = store;
  result.best_val_mse = std::numeric_limits<double>::infinity();

  struct Work {
    std::unique_ptr<Tape> tape;
    Forward out;
    double mse = 0.0;
    Dataset::MaskCounts counts;
    GradientBuffer grads;
  };

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.dropout_p = config.no_dropout ? 0.0 : featdrop::dropout_prob(static_cast<double>(epoch - 1), dropout);
    Rng shuffle_rng(derive_seed(config.seed, {kShuffleStream, epoch}));
    auto batches = pack_batches(data.split.train, groups, config.batch_size, shuffle_rng);
    if (config.max_batches > 0 && batches.size() > config.max_batches) batches.resize(config.max_batches);

    bool diverged = false;
    for (const auto& batch : batches) {
      const std::size_t B = batch.size();
      std::vector<Work> work(B);
      parallel_for(B, config.threads, [&](std::size_t b) {
        const std::size_t ex = batch[b];
        Rng mask_rng(derive_seed(config.seed, {kMaskStream, epoch, ex}));
        Rng drop_rng(derive_seed(config.seed, {kDropStream, epoch, ex}));
        auto in = data.input(ex, config.no_dropout ? nullptr : &dropout, rec.dropout_p, &mask_rng, &work[b].counts);
        work[b].tape = std::make_unique<Tape>();
        work[b].out = net.forward(*work[b].tape, in, true, &drop_rng);
        work[b].mse = example_mse(work[b].out.prediction.value(), data.hr[data.examples.examples[ex].current]);
      });

      double batch_mse = 0.0;
      for (const auto& w : work) batch_mse += w.mse;
      batch_mse /= static_cast<double>(B);

      double batch_cl = 0.0;
      InfoNceResult nce;
      const bool contrastive = lambda > 0.0 && work.front().out.z.valid();
      if (contrastive) {
        const std::size_t d = work.front().out.z.cols();
        std::vector<double> z;
        std::vector<int> g;
        for (std::size_t b = 0; b < B; ++b) {
          const auto v = work[b].out.z.value();
          z.insert(z.end(), v.begin(), v.end());
          g.push_back(groups[batch[b]]);
        }
        nce = info_nce_eval(z, B, d, g, config.temperature);
        batch_cl = nce.loss;
      }
      const double batch_loss = batch_mse + lambda * batch_cl;
      if (!std::isfinite(batch_loss)) {
        diverged = true;
        break;
      }

      parallel_for(B, config.threads, [&](std::size_t b) {
        auto& w = work[b];
        const auto& target = data.hr[data.examples.examples[batch[b]].current];
        const auto pred = w.out.prediction.value();
        const double k = 2.0 / (static_cast<double>(target.size()) * static_cast<double>(B));
        std::vector<Seed> seeds;
        Seed ps{w.out.prediction, std::vector<double>(target.size())};
        for (std::size_t t = 0; t < target.size(); ++t) ps.grad[t] = k * (pred[t] - target[t]);
        seeds.push_back(std::move(ps));
        if (contrastive) {
          const std::size_t d = w.out.z.cols();
          Seed zs{w.out.z, std::vector<double>(d)};
          for (std::size_t j = 0; j < d; ++j) zs.grad[j] = lambda * nce.grad[b * d + j];
          seeds.push_back(std::move(zs));
        }
        w.tape->backward(seeds);
        w.grads = GradientBuffer(store);
        w.tape->accumulate_into(w.grads, store);
        w.tape.reset();
      });
      GradientBuffer grads(store);
      for (const auto& w : work) grads.add(w.grads);
      try {
        optim.step(store, grads);
      } catch (const NonFiniteError&) {
        diverged = true;
        break;
      }
      for (const auto& w : work) {
        rec.current_masks += w.counts.current;
        rec.history_masks += w.counts.history;
      }
      rec.loss += batch_loss;
      rec.mse += batch_mse;
      rec.contrastive += batch_cl;
      ++rec.batches;
    }
    if (diverged) {
      result.stop_reason = "diverged";
      break;
    }
    rec.loss /= static_cast<double>(rec.batches);
    rec.mse /= static_cast<double>(rec.batches);
    rec.contrastive /= static_cast<double>(rec.batches);
    const auto val = evaluate(net, data, data.split.val, config.threads);
    rec.val_mse = val.mse;
    rec.val_mae = val.mae;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (std::isfinite(val.mse) && val.mse < result.best_val_mse) {
      result.best_val_mse = val.mse;
      result.best_epoch = epoch;
      best = store;
    }
    if (!std::isfinite(val.mse)) {
      result.stop_reason = "diverged";
      break;
    }
    if (epoch - result.best_epoch >= config.patience) {
      result.stop_reason = "patience";
      break;
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "max_epochs";

  copy_values(store, best);
  result.checkpoint.params = best;
  result.checkpoint.meta = checkpoint_meta(net, data, config);
  result.checkpoint.meta["best_epoch"] = result.best_epoch;
  result.checkpoint.meta["epochs_run"] = result.epochs.size();
  result.checkpoint.meta["stop_reason"] = result.stop_reason;
  return result;
}

LoadedModel LoadedModel::from_checkpoint(const Checkpoint& ckpt) {
  LoadedModel m;
  m.meta = ckpt.meta;
  m.net = make_network(ckpt.meta.at("network"));
  copy_values(m.net->params(), ckpt.params);
  m.data = DataConfig::from_json(ckpt.meta.at("data"));
  m.norm = data::Normalizer::from_json(ckpt.meta.at("normalizer"));
  m.vocab = data::Vocabularies::from_json(ckpt.meta.at("vocab"));
  m.registry = data::ChannelRegistry::from_json(ckpt.meta.at("registry"));
  return m;
}

LoadedModel LoadedModel::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("checkpoint not found: " + path.string());
  return from_checkpoint(Checkpoint::load(path));
}

Dataset LoadedModel::prepare(data::SegmentStore store) const {
  if (store.registry.names() != registry.names())
    throw std::invalid_argument("store channels differ from the checkpoint's registry");
  return Dataset::with_fitted(std::move(store), data, norm, vocab);
}

}  // namespace pulse::train
