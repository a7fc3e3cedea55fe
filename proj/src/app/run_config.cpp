#include "pulse/app/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pulse::app {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw std::invalid_argument("config key " + key + ": '" + value + "' is not " + what);
}

double to_number(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

}  // namespace

const std::vector<KeyDoc>& documented_keys() {
  static const std::vector<KeyDoc> keys{
      {"data.history_depth", "10", "previous segments per example"},
      {"data.group", "user_sport", "contrastive group: user, sport or user_sport"},
      {"data.split", "0.8,0.1,0.1", "train,val,test ratios"},
      {"data.split_by_session", "false", "keep windows of one session in one split part"},
      {"data.split_seed", "1", "split shuffle seed"},
      {"data.window", "450", "segment length in steps (ingest, synth)"},
      {"model.kind", "model", "model or mlp"},
      {"model.hidden", "128", "backbone LSTM width"},
      {"model.layers", "2", "backbone LSTM layers"},
      {"model.bidirectional", "true", "bidirectional backbone"},
      {"model.dropout", "0.2", "dropout between layers"},
      {"model.user_dim", "16", "user embedding width"},
      {"model.sport_dim", "8", "sport embedding width"},
      {"model.gender_dim", "2", "gender embedding width"},
      {"hist.bilstm_hidden", "64", "history workout BiLSTM width"},
      {"hist.gru_hidden", "128", "history GRU width"},
      {"hist.heads", "4", "attention heads"},
      {"hist.time_dim", "16", "gap embedding width"},
      {"hist.context_dim", "128", "context embedding width"},
      {"hist.pool", "1", "average-pool history workouts over blocks of this many steps"},
      {"train.batch_size", "64", "examples per batch"},
      {"train.learning_rate", "0.01", "RMSProp step size"},
      {"train.clip", "2.0", "global gradient norm clip"},
      {"train.patience", "10", "early stopping patience in epochs"},
      {"train.max_epochs", "100", "epoch cap"},
      {"train.max_batches", "0", "batches per epoch, 0 = full pass"},
      {"train.lambda", "0.1", "contrastive weight"},
      {"train.temperature", "0.1", "InfoNCE temperature"},
      {"train.seed", "1", "initialisation, shuffling and dropout seed"},
      {"train.threads", "1", "worker threads, 0 = all cores; results do not depend on it"},
      {"train.no_dropout", "false", "disable curriculum feature dropout"},
      {"train.no_tat", "false", "disable the history encoder"},
      {"train.no_contrastive", "false", "disable the contrastive term"},
      {"dropout.p_min", "0.1", "drop probability at epoch 0"},
      {"dropout.p_max", "0.5", "drop probability after the ramp"},
      {"dropout.epochs", "20", "ramp length in epochs"},
      {"dropout.min_keep", "2", "minimum observed channels kept"},
      {"synth.users", "20", "simulated users"},
      {"synth.sessions", "60", "sessions per user"},
      {"synth.sports", "run,cycle,hike", "simulated sports"},
      {"synth.min_duration", "450", "shortest session in seconds"},
      {"synth.max_duration", "900", "longest session in seconds"},
      {"synth.seed", "1", "generator seed"},
      {"eval.bootstrap_iterations", "200", "bootstrap replicates"},
      {"eval.bootstrap_fraction", "0.8", "resample size as a fraction of the test set"},
      {"eval.seed", "0", "bootstrap seed"},
      {"ablate.seeds", "1,2,3,4,5", "seeds per variant"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : documented_keys()) values_[k.key] = k.value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
  it->second = trim(value);
}

void RunConfig::merge_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(n) + ": expected key = value");
    try {
      set(trim(std::string_view(body).substr(0, eq)), body.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig rc;
  rc.merge_file(path);
  rc.validate();
  return rc;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

double RunConfig::number(const std::string& key) const { return to_number(key, get(key)); }

std::size_t RunConfig::count(const std::string& key) const { return to_count(key, get(key)); }

std::uint64_t RunConfig::seed(const std::string& key) const { return to_count(key, get(key)); }

bool RunConfig::flag(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string RunConfig::render() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

void RunConfig::validate() const {
  (void)data_config(*this);
  auto mc = model_config(*this);
  (void)network_spec(*this, mc);
  (void)train_config(*this, data::ChannelRegistry::standard());
  (void)corpus_config(*this);
  (void)eval_settings(*this);
  (void)ablation_seeds(*this);
}

train::DataConfig data_config(const RunConfig& rc) {
  train::DataConfig c;
  c.history_depth = rc.count("data.history_depth");
  c.group = data::parse_group_mode(rc.get("data.group"));
  const auto parts = rc.list("data.split");
  if (parts.size() != 3) bad_value("data.split", rc.get("data.split"), "three comma-separated ratios");
  for (std::size_t i = 0; i < 3; ++i) c.ratios[i] = to_number("data.split", parts[i]);
  c.split_by_session = rc.flag("data.split_by_session");
  c.split_seed = rc.seed("data.split_seed");
  return c;
}

model::ModelConfig model_config(const RunConfig& rc) {
  model::ModelConfig c;
  c.hidden = rc.count("model.hidden");
  c.layers = rc.count("model.layers");
  c.bidirectional = rc.flag("model.bidirectional");
  c.dropout = rc.number("model.dropout");
  c.user_dim = rc.count("model.user_dim");
  c.sport_dim = rc.count("model.sport_dim");
  c.gender_dim = rc.count("model.gender_dim");
  c.hist.depth = rc.count("data.history_depth");
  c.hist.bilstm_hidden = rc.count("hist.bilstm_hidden");
  c.hist.gru_hidden = rc.count("hist.gru_hidden");
  c.hist.attn_heads = rc.count("hist.heads");
  c.hist.time_dim = rc.count("hist.time_dim");
  c.hist.context_dim = rc.count("hist.context_dim");
  c.hist.pool = rc.count("hist.pool");
  return c;
}

nlohmann::json network_spec(const RunConfig& rc, const model::ModelConfig& fitted) {
  const auto& kind = rc.get("model.kind");
  if (kind != "model" && kind != "mlp") bad_value("model.kind", kind, "model or mlp");
  return {{"kind", kind}, {"config", fitted.to_json()}};
}

train::TrainConfig train_config(const RunConfig& rc, const data::ChannelRegistry& registry) {
  train::TrainConfig c;
  c.batch_size = rc.count("train.batch_size");
  c.learning_rate = rc.number("train.learning_rate");
  c.clip = rc.number("train.clip");
  c.patience = rc.count("train.patience");
  c.max_epochs = rc.count("train.max_epochs");
  c.max_batches = rc.count("train.max_batches");
  c.lambda = rc.number("train.lambda");
  c.temperature = rc.number("train.temperature");
  c.seed = rc.seed("train.seed");
  c.threads = rc.count("train.threads");
  c.no_dropout = rc.flag("train.no_dropout");
  c.no_tat = rc.flag("train.no_tat");
  c.no_contrastive = rc.flag("train.no_contrastive");
  c.dropout.p_min = rc.number("dropout.p_min");
  c.dropout.p_max = rc.number("dropout.p_max");
  c.dropout.epochs = rc.number("dropout.epochs");
  c.dropout.min_keep = rc.count("dropout.min_keep");
  c.dropout.main = registry.main();
  c.validate();
  c.dropout.validate(registry.size());
  return c;
}

synth::CorpusConfig corpus_config(const RunConfig& rc) {
  synth::CorpusConfig c;
  c.users = rc.count("synth.users");
  c.sessions_per_user = rc.count("synth.sessions");
  c.sports = rc.list("synth.sports");
  c.min_duration = rc.count("synth.min_duration");
  c.max_duration = rc.count("synth.max_duration");
  c.window = rc.count("data.window");
  c.seed = rc.seed("synth.seed");
  return c;
}

EvalSettings eval_settings(const RunConfig& rc) {
  EvalSettings s;
  s.iterations = rc.count("eval.bootstrap_iterations");
  s.fraction = rc.number("eval.bootstrap_fraction");
  s.seed = rc.seed("eval.seed");
  if (s.iterations == 0) bad_value("eval.bootstrap_iterations", rc.get("eval.bootstrap_iterations"), "positive");
  if (!(s.fraction > 0.0 && s.fraction <= 1.0))
    bad_value("eval.bootstrap_fraction", rc.get("eval.bootstrap_fraction"), "in (0, 1]");
  return s;
}

std::vector<std::uint64_t> ablation_seeds(const RunConfig& rc) {
  std::vector<std::uint64_t> out;
  for (const auto& s : rc.list("ablate.seeds")) out.push_back(to_count("ablate.seeds", s));
  if (out.empty()) bad_value("ablate.seeds", rc.get("ablate.seeds"), "a non-empty seed list");
  return out;
}

}  // namespace pulse::app
