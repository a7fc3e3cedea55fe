#include <gtest/gtest.h>

#include <stdexcept>

#include "pulse/app/run_config.hpp"

using namespace pulse;

namespace {
const std::filesystem::path kSource = PULSE_SOURCE_DIR;
}

TEST(RunConfig, StartsFromDocumentedDefaults) {
  app::RunConfig rc;
  for (const auto& k : app::documented_keys()) EXPECT_EQ(rc.get(k.key), k.value) << k.key;
  EXPECT_NO_THROW(rc.validate());
  EXPECT_EQ(rc.count("train.batch_size"), 64u);
  EXPECT_DOUBLE_EQ(rc.number("train.learning_rate"), 0.01);
  EXPECT_EQ(app::ablation_seeds(rc), (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
}

TEST(RunConfig, RejectsUnknownKeys) {
  app::RunConfig rc;
  EXPECT_THROW(rc.set("train.batchsize", "3"), std::invalid_argument);
  EXPECT_THROW(rc.get("nope"), std::invalid_argument);
}

TEST(RunConfig, MergeTextHandlesCommentsAndReportsLines) {
  app::RunConfig rc;
  rc.merge_text("# header\n\ntrain.seed = 7   # trailing\n  model.hidden=32\n", "x.cfg");
  EXPECT_EQ(rc.seed("train.seed"), 7u);
  EXPECT_EQ(rc.count("model.hidden"), 32u);
  try {
    rc.merge_text("train.seed = 1\nmodel.hidden\n", "y.cfg");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("y.cfg:2:"), std::string::npos) << e.what();
  }
  try {
    rc.merge_text("bogus.key = 1\n", "z.cfg");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("z.cfg:1:"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, TypedAccessorsRejectBadValues) {
  app::RunConfig rc;
  rc.set("train.batch_size", "-3");
  EXPECT_THROW(rc.validate(), std::invalid_argument);
  rc = {};
  rc.set("train.no_tat", "maybe");
  EXPECT_THROW(rc.validate(), std::invalid_argument);
  rc = {};
  rc.set("data.split", "0.8,0.2");
  EXPECT_THROW(rc.validate(), std::invalid_argument);
  rc = {};
  rc.set("train.learning_rate", "0.01x");
  EXPECT_THROW(rc.validate(), std::invalid_argument);
}

TEST(RunConfig, ListsTrimAndSkipEmpty) {
  app::RunConfig rc;
  rc.set("synth.sports", " run , swim,, hike ");
  EXPECT_EQ(rc.list("synth.sports"), (std::vector<std::string>{"run", "swim", "hike"}));
}

TEST(RunConfig, BuildersCarryValues) {
  app::RunConfig rc;
  rc.merge_text("data.history_depth = 3\nhist.heads = 2\ntrain.no_contrastive = true\nsynth.users = 4\n");
  EXPECT_EQ(app::model_config(rc).hist.depth, 3u);
  EXPECT_EQ(app::model_config(rc).hist.attn_heads, 2u);
  const auto tc = app::train_config(rc, data::ChannelRegistry::standard());
  EXPECT_EQ(tc.effective_lambda(), 0.0);
  EXPECT_EQ(tc.dropout.main, data::ChannelRegistry::standard().main());
  EXPECT_EQ(app::corpus_config(rc).users, 4u);
}

TEST(RunConfig, RenderIsSortedAndRoundTrips) {
  app::RunConfig rc;
  rc.set("train.seed", "9");
  app::RunConfig back;
  back.merge_text(rc.render());
  EXPECT_EQ(back.render(), rc.render());
  EXPECT_EQ(rc.to_json().at("train.seed"), "9");
}

TEST(ShippedConfigs, DefaultFileMatchesBuiltIns) {
  const auto rc = app::RunConfig::load(kSource / "configs" / "default.cfg");
  EXPECT_EQ(rc.render(), app::RunConfig().render());
}

TEST(ShippedConfigs, DeskFilesLoad) {
  EXPECT_NO_THROW(app::RunConfig::load(kSource / "configs" / "desk.cfg"));
  app::RunConfig rc;
  rc.merge_file(kSource / "configs" / "desk.cfg");
  EXPECT_NO_THROW(rc.merge_file(kSource / "configs" / "desk_ablation.cfg"));
  EXPECT_NO_THROW(rc.validate());
}

TEST(ShippedConfigs, DevicesFileMatchesBuiltIns) {
  const auto loaded = synth::load_devices(kSource / "configs" / "devices.json");
  const auto builtin = synth::default_devices();
  ASSERT_EQ(loaded.size(), builtin.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded[i].to_json(), builtin[i].to_json());
}
