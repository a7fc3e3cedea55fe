#include <gtest/gtest.h>

#include <cmath>

#include "pulse/model/model.hpp"
#include "pulse/numerics/gradcheck.hpp"
#include "pulse/train/network.hpp"

using namespace pulse;
using namespace pulse::num;
using namespace pulse::model;

namespace {

constexpr std::size_t kD = 4;

ModelConfig small_config() {
  ModelConfig c;
  c.channels = kD;
  c.hist.depth = 3;
  c.hist.bilstm_hidden = 2;
  c.hist.gru_hidden = 4;
  c.hist.attn_heads = 2;
  c.hist.time_dim = 3;
  c.hist.context_dim = 4;
  c.hidden = 3;
  c.user_dim = 2;
  c.sport_dim = 2;
  c.gender_dim = 1;
  c.users = 2;
  c.sports = 2;
  c.genders = 1;
  c.dropout = 0.0;
  return c;
}

std::vector<double> random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -scale, scale);
  return v;
}

HistoryItem item(std::size_t T, double gap, Rng& rng) {
  HistoryItem h;
  h.length = T;
  h.features = random_vec(T * kD, rng);
  h.hr = random_vec(T, rng);
  h.gap = gap;
  return h;
}

ModelInput input(std::size_t T, std::size_t history, Rng& rng) {
  ModelInput in;
  in.length = T;
  in.features = random_vec(T * kD, rng);
  in.attributes = {1, 0, 0};
  for (std::size_t i = 0; i < history; ++i) in.history.push_back(item(T, 3600.0 * (i + 1), rng));
  return in;
}

void randomize(ParameterStore& store, Rng& rng, double scale = 0.5) {
  for (std::size_t i = 0; i < store.size(); ++i)
    for (auto& v : store.at(i).storage()) v = uniform(rng, -scale, scale);
}

GradCheckOptions probes(std::size_t n) {
  GradCheckOptions o;
  o.probes = n;
  o.seed = 3;
  return o;
}

}  // namespace

TEST(HistoryEncoder, EmptyHistoryGivesDefaultContext) {
  ParameterStore store;
  Rng rng(1);
  HistoryEncoder enc(store, small_config(), rng);
  store["hist.default_context"].storage() = {0.1, -0.2, 0.3, 0.4};
  Tape tape;
  auto r = enc.encode(tape, store, {}, false, nullptr);
  EXPECT_EQ(std::vector<double>(r.context.value().begin(), r.context.value().end()),
            (std::vector<double>{0.1, -0.2, 0.3, 0.4}));
  EXPECT_TRUE(r.weights.empty());
}

TEST(HistoryEncoder, DefaultContextStartsAtZeroAndReceivesGradient) {
  Model m(small_config(), 4);
  for (double v : m.params()["hist.default_context"].storage()) EXPECT_EQ(v, 0.0);
  Rng rng(2);
  auto in = input(5, 0, rng);
  Tape tape;
  auto out = m.forward(tape, in, false, nullptr);
  tape.backward(sum(out.prediction));
  GradientBuffer g(m.params());
  tape.accumulate_into(g, m.params());
  double norm = 0.0;
  for (double v : g[m.params().index("hist.default_context")]) norm += v * v;
  EXPECT_GT(norm, 0.0);
}

TEST(HistoryEncoder, PaddedSlotsGetZeroWeightAndSingleItemTakesAll) {
  ParameterStore store;
  Rng rng(5);
  HistoryEncoder enc(store, small_config(), rng);
  randomize(store, rng);
  Tape tape;
  auto r = enc.encode(tape, store, {item(6, 100.0, rng)}, false, nullptr);
  ASSERT_EQ(r.weights.size(), 2u);
  for (const auto& head : r.weights) {
    ASSERT_EQ(head.size(), 3u);
    EXPECT_EQ(head[0], 0.0);
    EXPECT_EQ(head[1], 0.0);
    EXPECT_DOUBLE_EQ(head[2], 1.0);
  }
}

TEST(HistoryEncoder, OnlyTheMostRecentDepthItemsMatter) {
  ParameterStore store;
  Rng rng(6);
  HistoryEncoder enc(store, small_config(), rng);
  randomize(store, rng);
  std::vector<HistoryItem> h;
  for (int i = 0; i < 4; ++i) h.push_back(item(5, 60.0 * (i + 1), rng));
  Tape t1, t2;
  auto full = enc.encode(t1, store, h, false, nullptr);
  h[0] = item(5, 1.0, rng);
  auto changed = enc.encode(t2, store, h, false, nullptr);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(full.context.value()[j], changed.context.value()[j]);
}

TEST(HistoryEncoder, NegativeGapRejected) {
  ParameterStore store;
  Rng rng(1);
  HistoryEncoder enc(store, small_config(), rng);
  Tape tape;
  EXPECT_THROW(enc.embed_gap(tape, store, -1.0), std::invalid_argument);
}

TEST(HistoryEncoder, TimeEmbeddingGradient) {
  ParameterStore store;
  Rng rng(7);
  HistoryEncoder enc(store, small_config(), rng);
  randomize(store, rng);
  auto report = grad_check_params(
      store,
      [&](Tape& tape) {
        Var a = enc.embed_gap(tape, store, 5400.0);
        Var b = enc.embed_gap(tape, store, 12.5);
        return sum(mul(a, b));
      },
      probes(0));
  EXPECT_TRUE(report.passed) << report.max_rel_error;
}

TEST(HistoryEncoder, PoolRowsAveragesBlocks) {
  std::vector<double> m{1, 10, 3, 30, 5, 50, 7, 70, 9, 90};
  EXPECT_EQ(pool_rows(m, 5, 2, 2), (std::vector<double>{2, 20, 6, 60}));
  EXPECT_EQ(pool_rows(m, 5, 2, 1), m);
}

TEST(Model, PredictionHasOneValuePerStepAndIsDeterministic) {
  Model m(small_config(), 1);
  Rng rng(3);
  auto in = input(7, 2, rng);
  Tape a, b;
  auto o1 = m.forward(a, in, false, nullptr);
  auto o2 = m.forward(b, in, false, nullptr);
  EXPECT_EQ(o1.prediction.rows(), 7u);
  EXPECT_EQ(o1.prediction.cols(), 1u);
  EXPECT_EQ(o1.z.cols(), 6u);
  for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(o1.prediction.value()[t], o2.prediction.value()[t]);
}

TEST(Model, SameSeedSameParameters) {
  Model a(small_config(), 9), b(small_config(), 9), c(small_config(), 10);
  EXPECT_TRUE(a.params() == b.params());
  EXPECT_FALSE(a.params() == c.params());
}

TEST(Model, ZeroParametersPredictZero) {
  Model m(small_config(), 2);
  for (std::size_t i = 0; i < m.params().size(); ++i)
    std::fill(m.params().at(i).storage().begin(), m.params().at(i).storage().end(), 0.0);
  Rng rng(4);
  Tape tape;
  auto out = m.forward(tape, input(4, 1, rng), false, nullptr);
  for (double v : out.prediction.value()) EXPECT_EQ(v, 0.0);
}

TEST(Model, DisablingHistoryRemovesExactlyTheHistoryParameters) {
  auto with = small_config();
  auto without = with;
  without.use_history = false;
  Model a(with, 1), b(without, 1);
  EXPECT_GT(a.history_parameter_count(), 0u);
  EXPECT_EQ(b.history_parameter_count(), 0u);
  EXPECT_EQ(a.params().scalar_count() - b.params().scalar_count(), a.history_parameter_count());
  Rng rng(1);
  Tape tape;
  auto out = b.forward(tape, input(4, 2, rng), false, nullptr);
  for (double v : out.context.value()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(out.context.cols(), with.hist.context_dim);
}

TEST(Model, TrainingNeedsRng) {
  Model m(small_config(), 1);
  Rng rng(1);
  Tape tape;
  EXPECT_THROW(m.forward(tape, input(4, 0, rng), true, nullptr), std::invalid_argument);
}

TEST(Model, LoadParametersReproducesOutputs) {
  Model a(small_config(), 1), b(small_config(), 2);
  b.load_parameters(a.params());
  Rng rng(8);
  auto in = input(5, 2, rng);
  Tape t1, t2;
  auto o1 = a.forward(t1, in, false, nullptr);
  auto o2 = b.forward(t2, in, false, nullptr);
  for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(o1.prediction.value()[t], o2.prediction.value()[t]);
  ModelConfig other = small_config();
  other.hidden = 4;
  Model c(other, 1);
  EXPECT_THROW(c.load_parameters(a.params()), std::invalid_argument);
}

TEST(Model, FullLossGradient) {
  Model m(small_config(), 11);
  Rng rng(12);
  randomize(m.params(), rng, 0.4);
  auto in = input(5, 2, rng);
  auto target = random_vec(5, rng);
  auto report = grad_check_params(
      m.params(),
      [&](Tape& tape) {
        auto out = m.forward(tape, in, false, nullptr);
        Var y = tape.constant(5, 1, target);
        return add(mse(out.prediction, y), scale(sum(out.z), 0.1));
      },
      probes(100));
  EXPECT_TRUE(report.passed) << report.max_rel_error << " at " << report.worst_index;
  EXPECT_EQ(report.probes, 100u);
}

TEST(Mlp, ZeroFinalLayerPredictsZero) {
  train::MlpNetwork net(small_config(), 1);
  Rng rng(2);
  Tape tape;
  auto out = net.forward(tape, input(6, 1, rng), false, nullptr);
  for (double v : out.prediction.value()) EXPECT_EQ(v, 0.0);
  EXPECT_FALSE(out.z.valid());
}

TEST(Mlp, PreviousSummary) {
  ModelInput in;
  in.length = 1;
  HistoryItem h;
  h.length = 2;
  h.features = {1, 2, 3, 4, 5, 6, 7, 8};  // T=2, D=4
  h.hr = {0.5, 1.5};
  in.history = {h};
  EXPECT_EQ(train::MlpNetwork::previous_summary(in, 4),
            (std::vector<double>{3, 4, 5, 6, 1, 2, 3, 4, 5, 6, 7, 8, 1.0}));
  in.history.clear();
  EXPECT_EQ(train::MlpNetwork::previous_summary(in, 4), std::vector<double>(13, 0.0));
}

TEST(Mlp, GradientAndDeterminism) {
  train::MlpNetwork net(small_config(), 5), same(small_config(), 5);
  EXPECT_TRUE(net.params() == same.params());
  Rng rng(6);
  randomize(net.params(), rng, 0.4);
  auto in = input(4, 1, rng);
  auto target = random_vec(4, rng);
  auto report = grad_check_params(
      net.params(),
      [&](Tape& tape) {
        auto out = net.forward(tape, in, false, nullptr);
        return mse(out.prediction, tape.constant(4, 1, target));
      },
      probes(100));
  EXPECT_TRUE(report.passed) << report.max_rel_error;
}

TEST(Network, DescribeRoundTrip) {
  train::ModelNetwork a(small_config(), 3);
  auto b = train::make_network(a.describe(), 3);
  EXPECT_TRUE(a.params() == b->params());
  EXPECT_THROW(train::make_network({{"kind", "tree"}, {"config", small_config().to_json()}}), std::invalid_argument);
}
