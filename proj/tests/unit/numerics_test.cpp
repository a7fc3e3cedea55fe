#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pulse/numerics/checkpoint.hpp"
#include "pulse/numerics/gradcheck.hpp"
#include "pulse/numerics/layers.hpp"
#include "pulse/numerics/optim.hpp"

using namespace pulse;
using namespace pulse::num;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -scale, scale);
  return v;
}

void randomize(ParameterStore& store, Rng& rng, double scale = 0.5) {
  for (std::size_t i = 0; i < store.size(); ++i)
    for (auto& v : store.at(i).storage()) v = uniform(rng, -scale, scale);
}

GradCheckOptions probes(std::size_t n, std::uint64_t seed = 1) {
  GradCheckOptions o;
  o.probes = n;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Tensor, ShapeMismatchThrows) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
}

TEST(ParameterStore, DuplicatePathRejectedAndOrderStable) {
  ParameterStore a;
  a.add("x", Tensor({2}));
  a.add("y", Tensor({3}));
  EXPECT_THROW(a.add("x", Tensor({1})), std::invalid_argument);
  EXPECT_EQ(a.path(0), "x");
  EXPECT_EQ(a.path(1), "y");
  EXPECT_EQ(a.scalar_count(), 5u);
}

TEST(LstmCell, ZeroParamsGiveZeroState) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_lstm(store, "l", 3, 4, rng);
  for (std::size_t i = 0; i < store.size(); ++i) std::fill(store.at(i).storage().begin(), store.at(i).storage().end(), 0.0);
  Tape tape;
  auto w = bind(tape, store, p);
  auto out = lstm_cell(tape.constant(1, 3, {0.3, -2.0, 5.0}), tape.constant(1, 4, {0, 0, 0, 0}),
                       tape.constant(1, 4, {0, 0, 0, 0}), w);
  for (double v : out.h.value()) EXPECT_EQ(v, 0.0);
  for (double v : out.c.value()) EXPECT_EQ(v, 0.0);
}

TEST(LstmCell, ForgetBiasStartsAtOne) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_lstm(store, "l", 3, 4, rng);
  const auto& b = store.at(p.b);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(b[k], (k >= 4 && k < 8) ? 1.0 : 0.0);
}

TEST(LstmCell, ShapeMismatchThrows) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_lstm(store, "l", 3, 4, rng);
  Tape tape;
  auto w = bind(tape, store, p);
  Var h = tape.constant(1, 4, std::vector<double>(4));
  EXPECT_THROW(lstm_cell(tape.constant(1, 2, {1, 2}), h, h, w), ShapeError);
}

TEST(LstmCell, RepeatCallsBitIdentical) {
  ParameterStore store;
  Rng rng(3);
  auto p = register_lstm(store, "l", 3, 4, rng);
  auto run = [&] {
    Tape tape;
    auto w = bind(tape, store, p);
    auto out = lstm_cell(tape.constant(1, 3, {0.1, 0.2, 0.3}), tape.constant(1, 4, {0.1, 0, 0, -0.2}),
                         tape.constant(1, 4, {0.5, 0.5, 0, 0}), w);
    std::vector<double> v(out.h.value().begin(), out.h.value().end());
    v.insert(v.end(), out.c.value().begin(), out.c.value().end());
    return v;
  };
  EXPECT_EQ(run(), run());
}

TEST(LstmCell, GradientMatchesFiniteDifferences) {
  ParameterStore store;
  Rng rng(5);
  auto p = register_lstm(store, "l", 3, 4, rng);
  randomize(store, rng);
  const auto x = random_vec(3, rng), h = random_vec(4, rng), c = random_vec(4, rng);
  auto loss = [&](Tape& tape) {
    auto w = bind(tape, store, p);
    Var hv = tape.variable(1, 4, h), cv = tape.variable(1, 4, c);
    auto out = lstm_cell(tape.constant(1, 3, x), hv, cv, w);
    return add(sum(mul(out.h, out.h)), sum(out.c));
  };
  auto r = grad_check_params(store, loss, probes(100));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  // inputs and previous state
  auto rx = grad_check(
      [&](Tape& tape, Var xs) {
        auto w = bind(tape, store, p);
        auto out = lstm_cell(slice_cols(xs, 0, 3), slice_cols(xs, 3, 4), slice_cols(xs, 7, 4), w);
        return add(sum(mul(out.h, out.h)), sum(out.c));
      },
      1, 11, [&] {
        auto v = x;
        v.insert(v.end(), h.begin(), h.end());
        v.insert(v.end(), c.begin(), c.end());
        return v;
      }());
  EXPECT_TRUE(rx.passed) << rx.max_rel_error;
}

TEST(LstmSequence, MatchesChainedCells) {
  ParameterStore store;
  Rng rng(7);
  auto p = register_lstm(store, "l", 2, 3, rng);
  const auto xs = random_vec(5 * 2, rng);
  for (bool reverse : {false, true}) {
    Tape tape;
    auto w = bind(tape, store, p);
    Var x = tape.constant(5, 2, xs);
    Var seq = lstm_sequence(x, w, reverse);
    Var h = tape.constant(1, 3, {0, 0, 0}), c = h;
    for (std::size_t s = 0; s < 5; ++s) {
      const std::size_t t = reverse ? 4 - s : s;
      auto st = lstm_cell(row(x, t), h, c, w);
      h = st.h, c = st.c;
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(seq.value()[t * 3 + k], h.value()[k], 1e-14);
    }
  }
}

TEST(LstmSequence, GradientMatchesFiniteDifferences) {
  ParameterStore store;
  Rng rng(8);
  auto fwd = register_lstm(store, "f", 2, 3, rng);
  auto bwd = register_lstm(store, "b", 2, 3, rng);
  const auto xs = random_vec(6 * 2, rng);
  const auto target = random_vec(6 * 6, rng);
  auto loss = [&](Tape& tape, Var x) {
    Var seq = bilstm_sequence(x, bind(tape, store, fwd), bind(tape, store, bwd));
    return add(sum(mul(seq, tape.constant(6, 6, target))), sum(mul(bilstm_final(seq, 3), bilstm_final(seq, 3))));
  };
  auto r = grad_check_params(store, [&](Tape& t) { return loss(t, t.constant(6, 2, xs)); }, probes(100));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  auto rx = grad_check(loss, 6, 2, xs);
  EXPECT_TRUE(rx.passed) << rx.max_rel_error;
}

TEST(GruCell, ZeroParamsHalveState) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_gru(store, "g", 2, 3, rng);
  for (std::size_t i = 0; i < store.size(); ++i) std::fill(store.at(i).storage().begin(), store.at(i).storage().end(), 0.0);
  Tape tape;
  Var h = gru_cell(tape.constant(1, 2, {4, -1}), tape.constant(1, 3, {2.0, -4.0, 1.0}), bind(tape, store, p));
  EXPECT_EQ(h.value()[0], 1.0);
  EXPECT_EQ(h.value()[1], -2.0);
  EXPECT_EQ(h.value()[2], 0.5);
}

TEST(GruCell, EmptySequenceReturnsInitialState) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_gru(store, "g", 2, 3, rng);
  Tape tape;
  Var h0 = tape.constant(1, 3, {1, 2, 3});
  Var out = gru_sequence(tape.constant(0, 2, {}), h0, bind(tape, store, p));
  EXPECT_EQ(out.id, h0.id);
}

TEST(GruCell, ShapeMismatchThrows) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_gru(store, "g", 2, 3, rng);
  Tape tape;
  EXPECT_THROW(gru_cell(tape.constant(1, 2, {1, 2}), tape.constant(1, 2, {1, 2}), bind(tape, store, p)),
               ShapeError);
}

TEST(GruCell, GradientMatchesFiniteDifferences) {
  ParameterStore store;
  Rng rng(9);
  auto p = register_gru(store, "g", 3, 4, rng);
  randomize(store, rng);
  const auto xs = random_vec(3 * 3, rng), h0 = random_vec(4, rng);
  auto loss = [&](Tape& tape, Var x) {
    Var seq = gru_sequence(x, tape.variable(1, 4, h0), bind(tape, store, p));
    return sum(mul(seq, seq));
  };
  auto r = grad_check_params(store, [&](Tape& t) { return loss(t, t.constant(3, 3, xs)); }, probes(100));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  auto rx = grad_check(loss, 3, 3, xs);
  EXPECT_TRUE(rx.passed) << rx.max_rel_error;
}

TEST(Attention, SingleKeyReturnsValueWithIdentityProjections) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_attention(store, "a", 4, 2, rng);
  for (auto* l : {&p.q, &p.k, &p.v, &p.o}) {
    auto& w = store.at(l->w);
    std::fill(w.storage().begin(), w.storage().end(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) w.at(i, i) = 1.0;
  }
  Tape tape;
  Var v = tape.constant(1, 4, {1.5, -2, 3, 0.25});
  auto out = multi_head_attention(tape.constant(1, 4, {9, 9, 9, 9}), tape.constant(1, 4, {1, 1, 1, 1}), v, {true},
                                  bind(tape, store, p));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(out.output.value()[k], v.value()[k]);
}

TEST(Attention, EqualLogitsGiveUniformWeightsAndMaskZero) {
  ParameterStore store;
  Rng rng(2);
  auto p = register_attention(store, "a", 4, 4, rng);
  Tape tape;
  std::vector<double> keys(5 * 4, 0.7);
  auto out = multi_head_attention(tape.constant(1, 4, {1, 2, 3, 4}), tape.constant(5, 4, keys),
                                  tape.constant(5, 4, random_vec(20, rng)), {false, true, true, true, true},
                                  bind(tape, store, p));
  for (const auto& head : out.weights) {
    EXPECT_EQ(head[0], 0.0);
    double s = 0.0;
    for (std::size_t j = 1; j < 5; ++j) {
      EXPECT_NEAR(head[j], 0.25, 1e-15);
      s += head[j];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Attention, AllMaskedThrows) {
  ParameterStore store;
  Rng rng(2);
  auto p = register_attention(store, "a", 4, 2, rng);
  Tape tape;
  Var kv = tape.constant(2, 4, std::vector<double>(8, 1.0));
  EXPECT_THROW(multi_head_attention(tape.constant(1, 4, {1, 2, 3, 4}), kv, kv, {false, false}, bind(tape, store, p)),
               std::invalid_argument);
}

TEST(Attention, HeadsMustDivideWidth) {
  ParameterStore store;
  Rng rng(2);
  EXPECT_THROW(register_attention(store, "a", 6, 4, rng), ShapeError);
}

TEST(Attention, OutputInConvexHullOfValuesWithIdentityOutput) {
  ParameterStore store;
  Rng rng(4);
  auto p = register_attention(store, "a", 2, 1, rng);
  auto& wv = store.at(p.v.w);
  auto& wo = store.at(p.o.w);
  std::fill(wv.storage().begin(), wv.storage().end(), 0.0);
  std::fill(wo.storage().begin(), wo.storage().end(), 0.0);
  wv.at(0, 0) = wv.at(1, 1) = wo.at(0, 0) = wo.at(1, 1) = 1.0;
  Tape tape;
  const auto vals = random_vec(6, rng);
  auto out = multi_head_attention(tape.constant(1, 2, {0.3, 0.1}), tape.constant(3, 2, random_vec(6, rng)),
                                  tape.constant(3, 2, vals), {true, true, true}, bind(tape, store, p));
  for (std::size_t c = 0; c < 2; ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t r = 0; r < 3; ++r) lo = std::min(lo, vals[r * 2 + c]), hi = std::max(hi, vals[r * 2 + c]);
    EXPECT_GE(out.output.value()[c], lo - 1e-12);
    EXPECT_LE(out.output.value()[c], hi + 1e-12);
  }
}

TEST(Attention, GradientMatchesFiniteDifferences) {
  ParameterStore store;
  Rng rng(11);
  auto p = register_attention(store, "a", 4, 2, rng);
  randomize(store, rng);
  const auto q = random_vec(4, rng), kv = random_vec(8, rng);
  auto loss = [&](Tape& tape, Var x) {
    Var kvv = slice_cols(x, 4, 8);
    Var keys = concat_rows(std::vector<Var>{slice_cols(kvv, 0, 4), slice_cols(kvv, 4, 4)});
    auto out = multi_head_attention(slice_cols(x, 0, 4), keys, keys, {true, true}, bind(tape, store, p));
    return sum(mul(out.output, out.output));
  };
  std::vector<double> point = q;
  point.insert(point.end(), kv.begin(), kv.end());
  auto r = grad_check_params(store, [&](Tape& t) { return loss(t, t.constant(1, 12, point)); }, probes(100));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  auto rx = grad_check(loss, 1, 12, point);
  EXPECT_TRUE(rx.passed) << rx.max_rel_error;
}

TEST(FeedForward, ZeroWeightsGiveZero) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_feed_forward(store, "f", 3, 5, 2, rng);
  for (std::size_t i = 0; i < store.size(); ++i) std::fill(store.at(i).storage().begin(), store.at(i).storage().end(), 0.0);
  Tape tape;
  Var y = feed_forward(tape.constant(1, 3, {1, 2, 3}), bind(tape, store, p));
  for (double v : y.value()) EXPECT_EQ(v, 0.0);
}

TEST(FeedForward, EvalModeDeterministic) {
  ParameterStore store;
  Rng rng(1);
  auto p = register_feed_forward(store, "f", 3, 5, 2, rng);
  auto run = [&] {
    Tape tape;
    Rng drop(99);
    Var y = feed_forward(tape.constant(1, 3, {1, 2, 3}), bind(tape, store, p), 0.2, &drop, false);
    return std::vector<double>(y.value().begin(), y.value().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(FeedForward, GradientMatchesFiniteDifferences) {
  ParameterStore store;
  Rng rng(12);
  auto p = register_feed_forward(store, "f", 3, 5, 2, rng);
  randomize(store, rng);
  const auto x = random_vec(2 * 3, rng);
  auto loss = [&](Tape& tape, Var xs) {
    Var y = feed_forward(xs, bind(tape, store, p));
    return sum(mul(y, y));
  };
  auto r = grad_check_params(store, [&](Tape& t) { return loss(t, t.constant(2, 3, x)); }, probes(100));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  EXPECT_TRUE(grad_check(loss, 2, 3, x).passed);
}

TEST(Ops, ElementwiseGradients) {
  Rng rng(13);
  const auto x = random_vec(6, rng);
  const auto m = random_vec(6, rng);
  auto fn = [&](Tape& t, Var a) {
    Var b = t.constant(2, 3, m);
    Var z = add(mul(tanh(a), sigmoid(b)), gelu(sub(a, b)));
    Var y = matmul_nt(z, scale(a, 0.5));
    return add(mean(y), sum(l2_normalize_rows(add(a, t.constant(1, 3, {2, 2, 2})))));
  };
  auto r = grad_check(fn, 2, 3, x);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Rng rng(14);
  Tape tape;
  Var s = masked_softmax(tape.constant(3, 4, random_vec(12, rng, 20.0)), {true, false, true, true});
  for (std::size_t r = 0; r < 3; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_GE(s.value()[r * 4 + c], 0.0);
      total += s.value()[r * 4 + c];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(s.value()[r * 4 + 1], 0.0);
  }
}

TEST(Ops, ConstantFunctionHasZeroGradient) {
  auto r = grad_check([](Tape& t, Var) { return t.constant(1, 1, {3.0}); }, 1, 3, {1, 2, 3});
  EXPECT_TRUE(r.passed);
  Tape tape;
  Var x = tape.variable(1, 3, {1, 2, 3});
  Var y = add(scale(sum(x), 0.0), tape.constant(1, 1, {3.0}));
  tape.backward(y);
  for (double g : tape.grad(x.id)) EXPECT_EQ(g, 0.0);
}

TEST(GradCheck, SquareAtThree) {
  Tape tape;
  Var x = tape.variable(1, 1, {3.0});
  tape.backward(mul(x, x));
  EXPECT_EQ(tape.grad(x.id)[0], 6.0);
  auto r = grad_check([](Tape&, Var v) { return mul(v, v); }, 1, 1, {3.0});
  EXPECT_NEAR(r.worst_numeric, 6.0, 1e-7);
  EXPECT_TRUE(r.passed);
}

TEST(GradCheck, DetectsWrongGradient) {
  // A node whose backward pass is deliberately off by a factor of two.
  auto bad = [](Tape& t, Var x) {
    const auto id = x.id;
    return t.emit(1, 1, {x.item() * x.item()}, {x}, [id](Tape& tp, std::uint32_t self) {
      tp.grad(id)[0] += tp.grad_value(self)[0] * 4.0 * tp.value(id)[0];
    });
  };
  EXPECT_FALSE(grad_check(bad, 1, 1, {3.0}).passed);
}

TEST(GradCheck, PrefixRestrictsProbedParameters) {
  ParameterStore store;
  store.add("a.w", Tensor({2}, std::vector<double>{1, 2}));
  store.add("b.w", Tensor({3}, std::vector<double>{3, 4, 5}));
  auto loss = [&](Tape& t) { return add(sum(mul(t.param(store, "a.w"), t.param(store, "a.w"))), sum(t.param(store, "b.w"))); };
  GradCheckOptions opts;
  opts.prefix = "b.";
  auto r = grad_check_params(store, loss, opts);
  EXPECT_EQ(r.probes, 3u);
  EXPECT_TRUE(r.passed);
  opts.prefix = "c.";
  EXPECT_THROW(grad_check_params(store, loss, opts), std::invalid_argument);
}

TEST(RmsProp, ZeroGradientLeavesParameters) {
  ParameterStore store;
  store.add("w", Tensor({3}, std::vector<double>{1, -2, 3}));
  const ParameterStore before = store;
  RmsProp opt(store, {});
  GradientBuffer g(store);
  opt.step(store, g);
  EXPECT_TRUE(store == before);
}

TEST(RmsProp, ClipsGlobalNormFourToTwo) {
  ParameterStore store;
  store.add("a", Tensor({2}));
  store.add("b", Tensor({2}));
  GradientBuffer g(store);
  g[0][0] = 2.0, g[0][1] = 2.0, g[1][0] = 2.0, g[1][1] = 2.0;  // norm 4
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 2.0), 4.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (double v : g[i]) EXPECT_DOUBLE_EQ(v, 1.0);
  // idempotent
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 2.0), 2.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (double v : g[i]) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(RmsProp, ScalarClosedForm) {
  ParameterStore store;
  store.add("w", Tensor({1}, std::vector<double>{1.0}));
  RmsProp opt(store, {0.01, 0.99, 1e-8, 2.0});
  GradientBuffer g(store);
  g[0][0] = 0.5;
  opt.step(store, g);
  // v = 0.01 * 0.25 = 0.0025, step = 0.01 * 0.5 / (0.05 + 1e-8)
  EXPECT_NEAR(opt.accumulators()[0][0], 0.0025, 1e-17);
  EXPECT_NEAR(store.at(0)[0], 1.0 - 0.005 / (0.05 + 1e-8), 1e-15);
  g[0][0] = -1.0;
  opt.step(store, g);
  const double v2 = 0.99 * 0.0025 + 0.01 * 1.0;
  EXPECT_NEAR(opt.accumulators()[0][0], v2, 1e-15);
  EXPECT_NEAR(store.at(0)[0], 1.0 - 0.005 / (0.05 + 1e-8) + 0.01 / (std::sqrt(v2) + 1e-8), 1e-15);
}

TEST(RmsProp, NonFiniteGradientNamesParameter) {
  ParameterStore store;
  store.add("encoder.w", Tensor({2}));
  RmsProp opt(store, {});
  GradientBuffer g(store);
  g[0][1] = NAN;
  try {
    opt.step(store, g);
    FAIL();
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.w"), std::string::npos);
  }
}

TEST(Checkpoint, BitExactRoundTrip) {
  Checkpoint ck;
  Rng rng(21);
  ck.params.add("a.b", Tensor({2, 3}, random_vec(6, rng, 1e6)));
  ck.params.add("c", Tensor({4}, std::vector<double>{-0.0, 1e-310, -3.5, 0.1}));
  ck.meta["config"] = {{"x", 0.1}, {"name", "demo"}};
  std::stringstream ss;
  ck.write(ss);
  auto back = Checkpoint::read(ss);
  EXPECT_TRUE(back.params == ck.params);
  EXPECT_EQ(std::signbit(back.params.at(1)[0]), true);
  EXPECT_EQ(back.meta, ck.meta);
  std::stringstream again;
  back.write(again);
  std::stringstream first;
  ck.write(first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Checkpoint, CorruptInputThrows) {
  std::stringstream ss("pulse-checkpoint 7\n");
  EXPECT_THROW(Checkpoint::read(ss), FormatError);
}

TEST(InfoNce, WorkedCases) {
  // B=2 single positive
  auto r2 = info_nce_eval(std::vector<double>{1, 2, -3, 0.5}, 2, 2, std::vector<int>{0, 0}, 0.1);
  EXPECT_EQ(r2.loss, 0.0);
  // B identical, one group
  for (std::size_t b : {3u, 5u}) {
    std::vector<double> z(b * 2);
    for (std::size_t i = 0; i < b; ++i) z[2 * i] = 0.6, z[2 * i + 1] = 0.8;
    auto r = info_nce_eval(z, b, 2, std::vector<int>(b, 4), 0.1);
    EXPECT_NEAR(r.loss, std::log(double(b - 1)), 1e-9);
  }
  auto r3 = info_nce_eval(std::vector<double>{1, 0, 1, 0, 0, 1}, 3, 2, std::vector<int>{0, 0, 1}, 0.5);
  EXPECT_NEAR(r3.loss, std::log1p(std::exp(-2.0)), 1e-9);
  EXPECT_NEAR(r3.loss, 0.126928, 1e-6);
}

TEST(InfoNce, NoPositivesIsZeroAndErrors) {
  auto r = info_nce_eval(std::vector<double>{1, 0, 0, 1}, 2, 2, std::vector<int>{0, 1}, 0.1);
  EXPECT_EQ(r.loss, 0.0);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(info_nce_eval(std::vector<double>{1, 0, 0, 1}, 2, 2, std::vector<int>{0, 0}, 0.0),
               std::invalid_argument);
  EXPECT_THROW(info_nce_eval(std::vector<double>{0, 0, 0, 1}, 2, 2, std::vector<int>{0, 0}, 0.1),
               std::domain_error);
}

TEST(InfoNce, GradientMatchesFiniteDifferences) {
  Rng rng(30);
  const std::vector<int> groups{0, 1, 0, 2, 1, 0};
  auto r = grad_check([&](Tape&, Var z) { return info_nce(z, groups, 0.1); }, 6, 4, random_vec(24, rng));
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(InfoNce, InvariantUnderOrthogonalTransform) {
  Rng rng(31);
  const auto z = random_vec(5 * 2, rng);
  const std::vector<int> groups{0, 0, 1, 1, 2};
  const double th = 0.77;
  std::vector<double> rz(z.size());
  for (std::size_t b = 0; b < 5; ++b) {
    rz[2 * b] = std::cos(th) * z[2 * b] - std::sin(th) * z[2 * b + 1];
    rz[2 * b + 1] = std::sin(th) * z[2 * b] + std::cos(th) * z[2 * b + 1];
  }
  EXPECT_NEAR(info_nce_eval(z, 5, 2, groups, 0.1).loss, info_nce_eval(rz, 5, 2, groups, 0.1).loss, 1e-9);
}

TEST(InfoNce, DecreasesWhenPositiveSimilarityGrows) {
  // z1 fixed, z2 rotates toward z1; z3 orthogonal to both rotations' plane.
  auto loss = [](double angle) {
    std::vector<double> z{1, 0, 0, std::cos(angle), std::sin(angle), 0, 0, 0, 1};
    return info_nce_eval(z, 3, 3, std::vector<int>{0, 0, 1}, 0.5).loss;
  };
  EXPECT_LT(loss(0.2), loss(0.8));
  EXPECT_LT(loss(0.8), loss(1.2));
}

TEST(Mse, WorkedCases) {
  Tape tape;
  EXPECT_EQ(mse(tape.constant(1, 2, {100, 110}), tape.constant(1, 2, {102, 108})).item(), 4.0);
  EXPECT_EQ(mse(tape.constant(1, 2, {1, 2}), tape.constant(1, 2, {1, 2})).item(), 0.0);
  EXPECT_EQ(mse(tape.constant(1, 2, {104, 106}), tape.constant(1, 2, {100, 110})).item(), 16.0);
}
