#include "pulse/train/ablation.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pulse/data/store.hpp"
#include "pulse/stats/stats.hpp"

namespace pulse::train {
namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

}  // namespace

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> v{"full", "no_dropout", "no_tat", "no_contrastive"};
  return v;
}

TrainConfig apply_variant(TrainConfig config, const std::string& variant) {
  if (variant == "full") return config;
  if (variant == "no_dropout") config.no_dropout = true;
  else if (variant == "no_tat") config.no_tat = true;
  else if (variant == "no_contrastive") config.no_contrastive = true;
  else throw std::invalid_argument("unknown ablation variant " + variant);
  return config;
}

const AblationRow& AblationReport::row(const std::string& variant) const {
  for (const auto& r : rows)
    if (r.variant == variant) return r;
  throw std::out_of_range("no ablation row " + variant);
}

std::string AblationReport::render() const {
  std::ostringstream out;
  out << "# pulse-ablation 1\n[runs]\nvariant\tseed\tstatus\ttest_mse\ttest_mae\tsilhouette_user\tcontrastive\tbest_epoch\tepochs\n";
  for (const auto& r : runs) {
    out << r.variant << '\t' << r.seed << '\t' << (r.ok ? "ok" : "failed: " + r.error) << '\t'
        << data::format_double(r.mse) << '\t' << data::format_double(r.mae) << '\t' << data::format_double(r.silhouette)
        << '\t' << data::format_double(r.contrastive) << '\t' << r.best_epoch << '\t' << r.epochs << '\n';
  }
  out << "[summary]\nvariant\truns\tfailures\tmse_mean\tmse_std\tmae_mean\tmae_std\tsilhouette_mean\tsilhouette_std\t"
         "contrastive_mean\n";
  for (const auto& r : rows) {
    out << r.variant << '\t' << r.runs << '\t' << r.failures << '\t' << data::format_double(r.mse_mean) << '\t'
        << data::format_double(r.mse_std) << '\t' << data::format_double(r.mae_mean) << '\t'
        << data::format_double(r.mae_std) << '\t' << data::format_double(r.silhouette_mean) << '\t'
        << data::format_double(r.silhouette_std) << '\t' << data::format_double(r.contrastive_mean) << '\n';
  }
  return out.str();
}

nlohmann::json AblationReport::to_json() const {
  nlohmann::json j;
  for (const auto& r : runs)
    j["runs"].push_back({{"variant", r.variant}, {"seed", r.seed}, {"ok", r.ok}, {"error", r.error},
                         {"mse", r.mse}, {"mae", r.mae}, {"silhouette", r.silhouette},
                         {"contrastive", r.contrastive}, {"best_epoch", r.best_epoch}, {"epochs", r.epochs}});
  for (const auto& r : rows)
    j["rows"].push_back({{"variant", r.variant}, {"runs", r.runs}, {"failures", r.failures},
                         {"mse_mean", r.mse_mean}, {"mse_std", r.mse_std}, {"mae_mean", r.mae_mean},
                         {"mae_std", r.mae_std}, {"silhouette_mean", r.silhouette_mean},
                         {"silhouette_std", r.silhouette_std}, {"contrastive_mean", r.contrastive_mean}});
  return j;
}

double user_silhouette(const Network& net, const Dataset& data, const std::vector<std::size_t>& examples,
                       std::size_t threads) {
  const auto z = embed(net, data, examples, threads);
  std::map<std::string, int> ids;
  std::vector<int> labels;
  for (auto ex : examples) {
    const auto& user = data.store.segments[data.examples.examples[ex].current].user_id;
    labels.push_back(ids.try_emplace(user, static_cast<int>(ids.size())).first->second);
  }
  return stats::silhouette(z, z.size() / examples.size(), labels);
}

AblationReport run_ablation(const Dataset& data, const nlohmann::json& network, const TrainConfig& base,
                            const std::vector<std::uint64_t>& seeds,
                            const std::function<void(const AblationRun&)>& on_run) {
  AblationReport report;
  for (const auto& variant : ablation_variants()) {
    std::vector<double> mse, mae, sil, cl;
    AblationRow row;
    row.variant = variant;
    for (auto seed : seeds) {
      AblationRun run;
      run.variant = variant;
      run.seed = seed;
      try {
        auto cfg = apply_variant(base, variant);
        cfg.seed = seed;
        auto spec = network;
        auto mc = model::ModelConfig::from_json(spec.at("config"));
        spec["config"] = fit_model_config(mc, data, cfg).to_json();
        auto net = make_network(spec, seed);
        auto result = train(*net, data, cfg);
        auto m = evaluate(*net, data, data.split.test, cfg.threads);
        run.mse = m.mse;
        run.mae = m.mae;
        run.silhouette = user_silhouette(*net, data, data.split.test, cfg.threads);
        run.best_epoch = result.best_epoch;
        run.epochs = result.epochs.size();
        for (const auto& e : result.epochs)
          if (e.epoch == result.best_epoch) run.contrastive = e.contrastive;
        run.ok = true;
        mse.push_back(run.mse);
        mae.push_back(run.mae);
        sil.push_back(run.silhouette);
        cl.push_back(run.contrastive);
      } catch (const std::exception& e) {
        run.error = e.what();
        ++row.failures;
      }
      ++row.runs;
      if (on_run) on_run(run);
      report.runs.push_back(run);
    }
    std::tie(row.mse_mean, row.mse_std) = mean_std(mse);
    std::tie(row.mae_mean, row.mae_std) = mean_std(mae);
    std::tie(row.silhouette_mean, row.silhouette_std) = mean_std(sil);
    row.contrastive_mean = mean_std(cl).first;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace pulse::train
