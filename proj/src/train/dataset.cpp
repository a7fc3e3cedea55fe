#include "pulse/train/dataset.hpp"

#include <stdexcept>

namespace pulse::train {

nlohmann::json DataConfig::to_json() const {
  return {{"history_depth", history_depth},
          {"group", data::to_string(group)},
          {"ratios", ratios},
          {"split_by_session", split_by_session},
          {"split_seed", split_seed}};
}

DataConfig DataConfig::from_json(const nlohmann::json& j) {
  DataConfig c;
  c.history_depth = j.at("history_depth").get<std::size_t>();
  c.group = data::parse_group_mode(j.at("group").get<std::string>());
  c.ratios = j.at("ratios").get<std::array<double, 3>>();
  c.split_by_session = j.at("split_by_session").get<bool>();
  c.split_seed = j.at("split_seed").get<std::uint64_t>();
  return c;
}

model::Attributes attributes_for(const data::Segment& s, const data::Vocabularies& vocab) {
  model::Attributes a;
  a.user = vocab.user.find(s.user_id).value_or(vocab.user.size());
  a.sport = vocab.sport.find(s.sport).value_or(vocab.sport.size());
  a.gender = s.gender.empty() ? vocab.gender.size() : vocab.gender.find(s.gender).value_or(vocab.gender.size());
  return a;
}

namespace {

void prepare(Dataset& ds) {
  const auto& segs = ds.store.segments;
  ds.features.resize(segs.size());
  ds.hr.resize(segs.size());
  ds.attributes.resize(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    ds.features[i] = ds.norm.features(segs[i]);
    ds.hr[i] = ds.norm.hr(segs[i]);
    ds.attributes[i] = attributes_for(segs[i], ds.vocab);
  }
}

}  // namespace

data::Split split_for(const data::SegmentStore& store, const DataConfig& config) {
  if (config.split_by_session) {
    std::vector<std::string> keys;
    for (const auto& s : store.segments) keys.push_back(s.user_id + "\x1f" + s.session_id);
    return data::split_corpus_grouped(keys, config.ratios, config.split_seed);
  }
  return data::split_corpus(store.segments.size(), config.ratios, config.split_seed);
}

Dataset Dataset::build(data::SegmentStore store, const DataConfig& config) {
  if (store.segments.empty()) throw std::invalid_argument("dataset: store has no segments");
  Dataset ds;
  ds.store = std::move(store);
  ds.config = config;
  ds.examples = data::build_examples(ds.store.segments, config.history_depth, config.group);
  ds.split = split_for(ds.store, config);
  if (ds.split.train.empty()) throw std::invalid_argument("dataset: empty training split");
  ds.norm = data::Normalizer::fit(ds.store.segments, ds.split.train);
  for (auto i : ds.split.train) {
    const auto& s = ds.store.segments[i];
    ds.vocab.user.add(s.user_id);
    ds.vocab.sport.add(s.sport);
    ds.vocab.device.add(s.device);
    if (!s.gender.empty()) ds.vocab.gender.add(s.gender);
  }
  prepare(ds);
  return ds;
}

Dataset Dataset::with_fitted(data::SegmentStore store, const DataConfig& config, const data::Normalizer& norm,
                             const data::Vocabularies& vocab) {
  Dataset ds;
  ds.store = std::move(store);
  ds.config = config;
  ds.examples = data::build_examples(ds.store.segments, config.history_depth, config.group);
  ds.split.test.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) ds.split.test[i] = i;
  ds.norm = norm;
  ds.vocab = vocab;
  prepare(ds);
  return ds;
}

model::ModelInput Dataset::input(std::size_t example, const featdrop::DropoutConfig* dropout, double p, Rng* rng,
                                 MaskCounts* counts) const {
  const auto& ex = examples.examples.at(example);
  auto masked = [&](std::size_t seg, bool is_history) {
    std::vector<double> f = features[seg];
    if (dropout) {
      const auto m = featdrop::sample_mask(store.segments[seg].observed, p, *dropout, *rng);
      featdrop::apply_mask_time_major(f, store.segments[seg].length(), m);
      if (counts) ++(is_history ? counts->history : counts->current);
    }
    return f;
  };
  model::ModelInput in;
  const auto& cur = store.segments[ex.current];
  in.length = cur.length();
  in.features = masked(ex.current, false);
  in.attributes = attributes[ex.current];
  for (std::size_t h = 0; h < ex.history.size(); ++h) {
    const auto seg = ex.history[h];
    model::HistoryItem item;
    item.length = store.segments[seg].length();
    item.features = masked(seg, true);
    item.hr = hr[seg];
    item.gap = ex.history_gaps[h];
    in.history.push_back(std::move(item));
  }
  return in;
}

}  // namespace pulse::train
