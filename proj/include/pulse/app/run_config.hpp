#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pulse/data/registry.hpp"
#include "pulse/model/config.hpp"
#include "pulse/stats/stats.hpp"
#include "pulse/synth/synth.hpp"
#include "pulse/train/dataset.hpp"
#include "pulse/train/trainer.hpp"

namespace pulse::app {

struct KeyDoc {
  std::string key;
  std::string value;  // default
  std::string doc;
};

/// Every accepted key with its default.
const std::vector<KeyDoc>& documented_keys();

/// Flat `section.key = value` configuration. Starts from the documented
/// defaults; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  /// Applies `key = value` lines; '#' starts a comment.
  void merge_text(std::string_view text, const std::string& origin = "<text>");
  void merge_file(const std::filesystem::path& path);
  static RunConfig load(const std::filesystem::path& path);

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;

  /// Effective configuration, one `key = value` line per key.
  std::string render() const;
  nlohmann::json to_json() const;

  /// Converts every typed key once; throws on the first bad value.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

train::DataConfig data_config(const RunConfig& rc);
/// Base model configuration; data-dependent sizes are filled by the trainer.
model::ModelConfig model_config(const RunConfig& rc);
/// {"kind": model|mlp, "config": ...} for make_network.
nlohmann::json network_spec(const RunConfig& rc, const model::ModelConfig& fitted);
train::TrainConfig train_config(const RunConfig& rc, const data::ChannelRegistry& registry);
synth::CorpusConfig corpus_config(const RunConfig& rc);

struct EvalSettings {
  std::size_t iterations = 200;
  double fraction = 0.8;
  std::uint64_t seed = 0;
};
EvalSettings eval_settings(const RunConfig& rc);
std::vector<std::uint64_t> ablation_seeds(const RunConfig& rc);

}  // namespace pulse::app
