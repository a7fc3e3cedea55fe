#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulse/app/run_config.hpp"
#include "pulse/ingest/vendor.hpp"
#include "pulse/stats/report.hpp"
#include "pulse/synth/synth.hpp"
#include "pulse/train/ablation.hpp"
#include "pulse/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pulse;

namespace {

class Log {
 public:
  bool json_mode = false;

  void event(const std::string& name, const json& fields = json::object()) const {
    if (json_mode) {
      json line = fields;
      line["event"] = name;
      std::cerr << line.dump() << '\n';
      return;
    }
    std::cerr << name;
    for (const auto& [k, v] : fields.items()) std::cerr << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
    std::cerr << '\n';
  }
};

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string log = "text";
};

app::RunConfig resolve(const Common& c, const std::map<std::string, std::string>& flags) {
  app::RunConfig rc;
  if (!c.config_file.empty()) rc.merge_file(c.config_file);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    rc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : flags) rc.set(k, v);
  rc.validate();
  return rc;
}

std::string config_header(const std::string& kind, const app::RunConfig& rc) {
  std::string out = "# pulse-" + kind + " 1\n";
  std::istringstream lines(rc.render());
  for (std::string l; std::getline(lines, l);) out += "# config " + l + "\n";
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

data::Segment read_segment_file(const fs::path& path, std::size_t dims, double hr_fill) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open segment file " + path.string());
  json j = json::parse(in);
  if (!j.contains("hr")) {
    // A planned workout: features only.
    const auto& ch = j.at("channels");
    const std::size_t T = ch.empty() ? 0 : ch.front().size();
    j["hr"] = std::vector<double>(T, hr_fill);
  }
  return data::segment_from_json(j, dims);
}

const std::vector<std::size_t>& split_part(const data::Split& s, const std::string& part) {
  if (part == "train") return s.train;
  if (part == "val") return s.val;
  if (part == "test") return s.test;
  throw std::invalid_argument("unknown split part " + part);
}

int cmd_ingest(const Common& c, const Log& log, const std::string& vendor, const fs::path& schema_path,
               const fs::path& in, const fs::path& registry_path, const fs::path& out) {
  auto rc = resolve(c, {});
  auto registry = data::ChannelRegistry::standard();
  if (!registry_path.empty()) {
    std::ifstream f(registry_path);
    if (!f) throw std::runtime_error("cannot open registry " + registry_path.string());
    registry = data::ChannelRegistry::from_json(json::parse(f));
  }
  auto schema = ingest::VendorSchema::load(schema_path);
  if (!vendor.empty() && schema.vendor != vendor)
    throw std::invalid_argument("schema is for vendor " + schema.vendor + ", not " + vendor);
  schema.validate(registry);
  auto result = ingest::ingest_directory(in, schema, registry, rc.count("data.window"));
  result.store.info = {{"source", "ingest"}, {"vendor", schema.vendor}, {"run_config", rc.to_json()}};
  result.store.save(out);
  json report = result.report.to_json();
  report["run_config"] = rc.to_json();
  write_text(out / "ingest_report.json", report.dump(2) + "\n");
  log.event("ingest", {{"files", result.report.files},
                       {"segments", result.report.segments},
                       {"dropped_samples", result.report.dropped_samples},
                       {"errors", result.report.errors.size()}});
  for (const auto& e : result.report.errors) log.event("ingest_error", {{"message", e}});
  return result.ok() ? 0 : 1;
}

int cmd_synth(const Common& c, const Log& log, const std::map<std::string, std::string>& flags,
              const fs::path& devices_path, const fs::path& out) {
  auto rc = resolve(c, flags);
  auto devices = devices_path.empty() ? synth::default_devices() : synth::load_devices(devices_path);
  auto cc = app::corpus_config(rc);
  auto corpus = synth::generate_corpus(cc, devices);
  json dev = json::array();
  for (const auto& d : devices) dev.push_back(d.to_json());
  corpus.store.info = {{"source", "synth"}, {"corpus", cc.to_json()}, {"devices", dev}, {"run_config", rc.to_json()}};
  corpus.store.save(out);
  log.event("synth", {{"sessions", corpus.sessions}, {"segments", corpus.store.segments.size()}});
  return 0;
}

int cmd_train(const Common& c, const Log& log, const std::map<std::string, std::string>& flags, const fs::path& store_path,
              const fs::path& out, fs::path epochs_path) {
  auto rc = resolve(c, flags);
  auto ds = train::Dataset::build(data::SegmentStore::load(store_path), app::data_config(rc));
  auto tc = app::train_config(rc, ds.store.registry);
  auto spec = app::network_spec(rc, train::fit_model_config(app::model_config(rc), ds, tc));
  auto net = train::make_network(spec, tc.seed);
  log.event("train_start", {{"examples", ds.size()},
                            {"train", ds.split.train.size()},
                            {"val", ds.split.val.size()},
                            {"test", ds.split.test.size()},
                            {"parameters", net->params().scalar_count()}});

  if (epochs_path.empty()) epochs_path = fs::path(out.string() + ".epochs.tsv");
  std::string epochs = config_header("epochs", rc);
  epochs += "epoch\tloss\tmse\tcontrastive\tval_mse\tval_mae\tdropout_p\tbatches\tcurrent_masks\thistory_masks\tseconds\n";
  auto result = train::train(*net, ds, tc, [&](const train::EpochRecord& e) {
    epochs += std::to_string(e.epoch) + '\t' + data::format_double(e.loss) + '\t' + data::format_double(e.mse) + '\t' +
              data::format_double(e.contrastive) + '\t' + data::format_double(e.val_mse) + '\t' +
              data::format_double(e.val_mae) + '\t' + data::format_double(e.dropout_p) + '\t' +
              std::to_string(e.batches) + '\t' + std::to_string(e.current_masks) + '\t' +
              std::to_string(e.history_masks) + '\t' + data::format_double(e.seconds) + '\n';
    log.event("epoch", e.to_json());
  });

  auto test = train::evaluate(*net, ds, ds.split.test, tc.threads);
  auto baseline = train::UserMeanBaseline::fit(ds.store, ds.split.train).evaluate(ds, ds.split.test);
  result.checkpoint.meta["run_config"] = rc.to_json();
  result.checkpoint.meta["test"] = {{"mse", test.mse}, {"mae", test.mae}, {"examples", test.examples.size()}};
  result.checkpoint.meta["user_mean_test"] = {{"mse", baseline.mse}, {"mae", baseline.mae}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  result.checkpoint.save(out);
  write_text(epochs_path, epochs);
  log.event("train_done", {{"stop_reason", result.stop_reason},
                           {"best_epoch", result.best_epoch},
                           {"best_val_mse", result.best_val_mse},
                           {"test_mse", test.mse},
                           {"test_mae", test.mae},
                           {"user_mean_test_mse", baseline.mse}});
  return 0;
}

int cmd_predict(const Common& c, const Log& log, const fs::path& ckpt, const fs::path& segment_path,
                const std::vector<std::string>& history, const fs::path& out) {
  auto rc = resolve(c, {});
  auto model = train::LoadedModel::load(ckpt);
  const double fill = model.norm.hr_mean;
  data::SegmentStore store;
  store.registry = model.registry;
  for (const auto& h : history) store.segments.push_back(read_segment_file(h, model.registry.size(), fill));
  auto current = read_segment_file(segment_path, model.registry.size(), fill);
  for (const auto& h : store.segments)
    if (h.user_id != current.user_id) throw std::invalid_argument("history segment of user " + h.user_id +
                                                                 " does not belong to user " + current.user_id);
  store.segments.push_back(current);
  const std::size_t target = store.segments.size() - 1;
  auto ds = model.prepare(std::move(store));
  std::size_t ex = 0;
  while (ds.examples.examples[ex].current != target) ++ex;
  auto y = train::predict_bpm(*model.net, ds, ex);
  std::string text = config_header("predict", rc);
  text += "# history " + std::to_string(ds.examples.examples[ex].history.size()) + "\nt\thr_bpm\n";
  for (std::size_t t = 0; t < y.size(); ++t) text += std::to_string(t) + '\t' + data::format_double(y[t]) + '\n';
  write_text(out, text);
  log.event("predict", {{"steps", y.size()}, {"history", ds.examples.examples[ex].history.size()}});
  return 0;
}

int cmd_embed(const Common& c, const Log& log, const fs::path& ckpt, const fs::path& store_path, const fs::path& out) {
  auto rc = resolve(c, {});
  auto model = train::LoadedModel::load(ckpt);
  auto ds = model.prepare(data::SegmentStore::load(store_path));
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto z = train::embed(*model.net, ds, all, rc.count("train.threads"));
  const std::size_t d = all.empty() ? 0 : z.size() / all.size();
  std::string text = config_header("embed", rc);
  text += "segment\tuser\tsport\tsession\tgroup";
  for (std::size_t j = 0; j < d; ++j) text += "\tz" + std::to_string(j);
  text += '\n';
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& s = ds.store.segments[ds.examples.examples[i].current];
    text += std::to_string(ds.examples.examples[i].current) + '\t' + s.user_id + '\t' + s.sport + '\t' + s.session_id +
            '\t' + data::group_key(s, model.data.group);
    for (std::size_t j = 0; j < d; ++j) text += '\t' + data::format_double(z[i * d + j]);
    text += '\n';
  }
  write_text(out, text);
  log.event("embed", {{"examples", all.size()}, {"dim", d}});
  return 0;
}

int cmd_evaluate(const Common& c, const Log& log, const fs::path& ckpt, const fs::path& store_path,
                 const std::string& part, const fs::path& out) {
  auto rc = resolve(c, {});
  const auto settings = app::eval_settings(rc);
  auto model = train::LoadedModel::load(ckpt);
  auto store = data::SegmentStore::load(store_path);
  std::optional<data::Split> split;
  if (part != "all") split = train::split_for(store, model.data);
  auto ds = model.prepare(std::move(store));
  std::vector<std::size_t> examples;
  if (split) {
    examples = split_part(*split, part);
  } else {
    examples.resize(ds.size());
    for (std::size_t i = 0; i < examples.size(); ++i) examples[i] = i;
  }
  if (examples.empty()) throw std::invalid_argument("no examples to evaluate");
  auto m = train::evaluate(*model.net, ds, examples, rc.count("train.threads"));
  auto boot_mse = stats::bootstrap(m.example_mse, settings.iterations, settings.fraction, settings.seed);
  auto boot_mae = stats::bootstrap(m.example_mae, settings.iterations, settings.fraction, settings.seed);

  std::string text = config_header("evaluate", rc);
  text += "# split " + part + "\n[overall]\nmodel\tmetric\tvalue\tbootstrap_mean\tbootstrap_std\texamples\n";
  auto row = [&](const std::string& name, const std::string& metric, double v, const stats::Bootstrap& b) {
    text += name + '\t' + metric + '\t' + data::format_double(v) + '\t' + data::format_double(b.mean) + '\t' +
            data::format_double(b.std) + '\t' + std::to_string(examples.size()) + '\n';
  };
  row("model", "MSE", m.mse, boot_mse);
  row("model", "MAE", m.mae, boot_mae);
  json summary = {{"mse", m.mse}, {"mae", m.mae}, {"mse_bootstrap_std", boot_mse.std}};
  if (split) {
    auto um = train::UserMeanBaseline::fit(ds.store, split->train).evaluate(ds, examples);
    row("user_mean", "MSE", um.mse, stats::bootstrap(um.example_mse, settings.iterations, settings.fraction, settings.seed));
    row("user_mean", "MAE", um.mae, stats::bootstrap(um.example_mae, settings.iterations, settings.fraction, settings.seed));
    text += "[improvement]\nmetric\tpercent\nMSE\t" + data::format_double(stats::improvement(m.mse, um.mse)) +
            "\nMAE\t" + data::format_double(stats::improvement(m.mae, um.mae)) + '\n';
    summary["user_mean_mse"] = um.mse;
  }
  std::map<std::string, std::vector<std::size_t>> by_sport;
  for (std::size_t k = 0; k < examples.size(); ++k)
    by_sport[ds.store.segments[ds.examples.examples[examples[k]].current].sport].push_back(k);
  text += "[per_sport]\nsport\texamples\tMSE\tMAE\n";
  for (const auto& [sport, idx] : by_sport) {
    double se = 0.0, ae = 0.0;
    for (auto k : idx) {
      se += m.example_mse[k];
      ae += m.example_mae[k];
    }
    text += sport + '\t' + std::to_string(idx.size()) + '\t' + data::format_double(se / idx.size()) + '\t' +
            data::format_double(ae / idx.size()) + '\n';
  }
  write_text(out, text);
  log.event("evaluate", summary);
  return 0;
}

int cmd_stats(const Common& c, const Log& log, const fs::path& fixtures, const fs::path& out) {
  auto rc = resolve(c, {});
  auto report = stats::reproduce(fixtures);
  write_text(out, config_header("stats", rc) + report.render());
  log.event("stats", {{"improvements", report.improvements.size()}, {"pairwise", report.pairwise.size()}});
  return 0;
}

int cmd_ablate(const Common& c, const Log& log, const std::map<std::string, std::string>& flags,
               const fs::path& store_path, const fs::path& out) {
  auto rc = resolve(c, flags);
  auto ds = train::Dataset::build(data::SegmentStore::load(store_path), app::data_config(rc));
  auto tc = app::train_config(rc, ds.store.registry);
  auto spec = app::network_spec(rc, app::model_config(rc));
  auto report = train::run_ablation(ds, spec, tc, app::ablation_seeds(rc), [&](const train::AblationRun& r) {
    log.event("ablation_run", {{"variant", r.variant},
                               {"seed", r.seed},
                               {"ok", r.ok},
                               {"mse", r.mse},
                               {"mae", r.mae},
                               {"silhouette", r.silhouette},
                               {"error", r.error}});
  });
  write_text(out, config_header("ablation", rc) + report.render());
  std::size_t failures = 0;
  for (const auto& r : report.rows) failures += r.failures;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heart-rate prediction from heterogeneous wearable data"};
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_file, "flat section.key = value configuration file");
  app.add_option("--set", common.overrides, "override one config key (key=value), repeatable");
  app.add_option("--log", common.log, "progress format on standard error")->check(CLI::IsMember({"text", "json"}));
  app.require_subcommand(1);

  std::string vendor, part = "test";
  fs::path schema, in, registry, out, store, devices, ckpt, segment, epochs, fixtures;
  std::vector<std::string> history;
  std::map<std::string, std::string> flags;
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };

  auto* ingest = app.add_subcommand("ingest", "normalise a directory of vendor exports into a segment store");
  ingest->add_option("--vendor", vendor, "vendor name, checked against the schema");
  ingest->add_option("--schema", schema, "vendor schema (JSON)")->required();
  ingest->add_option("--in", in, "directory of exports")->required();
  ingest->add_option("--registry", registry, "channel registry (JSON); default is the built-in registry");
  ingest->add_option("--out", out, "output store directory")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  flag(synth, "--users", "synth.users", "simulated users");
  flag(synth, "--sessions", "synth.sessions", "sessions per user");
  flag(synth, "--seed", "synth.seed", "generator seed");
  synth->add_option("--devices", devices, "device templates (JSON); default is the two built-in devices");
  synth->add_option("--out", out, "output store directory")->required();

  auto* trn = app.add_subcommand("train", "train a model and write a checkpoint");
  trn->add_option("--store", store, "segment store")->required();
  trn->add_option("--out", out, "checkpoint path")->required();
  trn->add_option("--epochs-log", epochs, "epoch records (TSV); default <out>.epochs.tsv");
  flag(trn, "--seed", "train.seed", "training seed");
  flag(trn, "--threads", "train.threads", "worker threads");

  auto* pred = app.add_subcommand("predict", "predict heart rate for one segment");
  pred->add_option("--ckpt", ckpt, "checkpoint")->required();
  pred->add_option("--segment", segment, "current segment (JSON); hr may be omitted for planned workouts")->required();
  pred->add_option("--history", history, "earlier segments of the same user (JSON)");
  pred->add_option("--out", out, "output file; default standard output");

  auto* emb = app.add_subcommand("embed", "export user embeddings with group labels");
  emb->add_option("--ckpt", ckpt, "checkpoint")->required();
  emb->add_option("--store", store, "segment store")->required();
  emb->add_option("--out", out, "output file; default standard output");

  auto* eval = app.add_subcommand("evaluate", "MSE/MAE with bootstrap and a per-sport breakdown");
  eval->add_option("--ckpt", ckpt, "checkpoint")->required();
  eval->add_option("--store", store, "segment store")->required();
  eval->add_option("--split", part, "train, val, test (the checkpoint's split) or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  eval->add_option("--out", out, "report file; default standard output");

  auto* st = app.add_subcommand("stats", "reproduce the comparison statistics from the result tables");
  st->add_option("--fixtures", fixtures, "directory holding the table fixtures")->required();
  st->add_option("--out", out, "report file; default standard output");

  auto* abl = app.add_subcommand("ablate", "train the full model and its ablations over several seeds");
  abl->add_option("--store", store, "segment store")->required();
  abl->add_option("--out", out, "report file; default standard output");
  flag(abl, "--seeds", "ablate.seeds", "comma-separated seeds");

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Log log;
  log.json_mode = common.log == "json";
  try {
    if (*ingest) return cmd_ingest(common, log, vendor, schema, in, registry, out);
    if (*synth) return cmd_synth(common, log, flags, devices, out);
    if (*trn) return cmd_train(common, log, flags, store, out, epochs);
    if (*pred) return cmd_predict(common, log, ckpt, segment, history, out);
    if (*emb) return cmd_embed(common, log, ckpt, store, out);
    if (*eval) return cmd_evaluate(common, log, ckpt, store, part, out);
    if (*st) return cmd_stats(common, log, fixtures, out);
    if (*abl) return cmd_ablate(common, log, flags, store, out);
  } catch (const std::exception& e) {
    log.event("error", {{"message", e.what()}});
    return 1;
  }
  return 2;
}
