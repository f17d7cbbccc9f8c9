#include <cmath>

#include "doctest.h"
#include "ember/error.hpp"
#include "ember/numerics/gradcheck.hpp"
#include "ember/numerics/layers.hpp"
#include "test_support.hpp"

using namespace ember;
using namespace ember::num;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void set1(ParamStore& s, const std::string& path, double v) {
  const auto& shape = s.info(s.id(path)).shape;
  s.set(path, Tensor(shape, std::vector<double>{v}));
}

Var vec(Tape& t, std::vector<double> v) { return t.constant(Tensor::vector(std::move(v))); }

}  // namespace

TEST_CASE("gru cell with zero parameters stays at zero") {
  ParamStore s;
  declare_cell(s, "g", CellKind::Gru, 3, 4);
  Tape t(s, {});
  Var h = gru_cell(t, "g", vec(t, {0.7, -2.0, 5.0}), zero_state(t, 4));
  for (double v : t.value(h).data()) CHECK(v == 0.0);
}

TEST_CASE("gru cell matches a hand evaluation of the gate equations") {
  ParamStore s;
  declare_cell(s, "g", CellKind::Gru, 1, 1);
  set1(s, "g.W_z", 0.5), set1(s, "g.U_z", -0.3), set1(s, "g.b_z", 0.1);
  set1(s, "g.W_r", 0.2), set1(s, "g.U_r", 0.4), set1(s, "g.b_r", -0.1);
  set1(s, "g.W_n", 0.7), set1(s, "g.U_n", -0.6), set1(s, "g.b_n", 0.05);
  const double x = 1.0, h = 0.3;
  const double z = logistic(0.5 * x - 0.3 * h + 0.1);
  const double r = logistic(0.2 * x + 0.4 * h - 0.1);
  const double n = std::tanh(0.7 * x - 0.6 * (r * h) + 0.05);
  const double expected = (1 - z) * n + z * h;
  CHECK(expected == doctest::Approx(0.40196410417633943).epsilon(1e-15));

  Tape t(s, {});
  Var out = gru_cell(t, "g", vec(t, {x}), vec(t, {h}));
  CHECK(t.scalar(out) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gru cell output depends on the previous state") {
  ParamStore s;
  declare_cell(s, "g", CellKind::Gru, 2, 3);
  testing::randomize(s, 17);
  Tape t(s, {});
  Var x = vec(t, {0.4, -0.9});
  Var h1 = gru_cell(t, "g", x, zero_state(t, 3));
  Var h2 = gru_cell(t, "g", x, h1);
  CHECK(testing::max_abs_diff(t.value(h1), t.value(h2)) > 1e-6);
  for (double v : t.value(h2).data()) CHECK(std::abs(v) < 1.0);
}

TEST_CASE("gru cell rejects mismatched input width") {
  ParamStore s;
  declare_cell(s, "g", CellKind::Gru, 2, 3);
  Tape t(s, {});
  CHECK_THROWS_AS(gru_cell(t, "g", vec(t, {1, 2, 3}), zero_state(t, 3)), DimensionError);
  CHECK_THROWS_AS(gru_cell(t, "g", vec(t, {1, 2}), zero_state(t, 2)), DimensionError);
}

TEST_CASE("lstm cell with zero parameters and zero state stays at zero") {
  ParamStore s;
  declare_cell(s, "l", CellKind::Lstm, 2, 3);
  Tape t(s, {});
  auto st = lstm_cell(t, "l", vec(t, {1.0, -1.0}), {zero_state(t, 3), zero_state(t, 3)});
  for (double v : t.value(st.h).data()) CHECK(v == 0.0);
  for (double v : t.value(st.c).data()) CHECK(v == 0.0);
}

TEST_CASE("lstm cell matches a hand evaluation of the gate equations") {
  ParamStore s;
  declare_cell(s, "l", CellKind::Lstm, 1, 1);
  set1(s, "l.W_i", 0.3), set1(s, "l.U_i", 0.2), set1(s, "l.b_i", 0.0);
  set1(s, "l.W_f", -0.4), set1(s, "l.U_f", 0.5), set1(s, "l.b_f", 0.1);
  set1(s, "l.W_o", 0.6), set1(s, "l.U_o", -0.1), set1(s, "l.b_o", -0.2);
  set1(s, "l.W_g", 0.9), set1(s, "l.U_g", 0.3), set1(s, "l.b_g", 0.05);
  const double x = 1.0, h = 0.3, c = 0.4;
  const double i = logistic(0.3 * x + 0.2 * h), f = logistic(-0.4 * x + 0.5 * h + 0.1);
  const double o = logistic(0.6 * x - 0.1 * h - 0.2), g = std::tanh(0.9 * x + 0.3 * h + 0.05);
  const double c2 = f * c + i * g;
  CHECK(c2 == doctest::Approx(0.643235586248181).epsilon(1e-14));

  Tape t(s, {});
  auto st = lstm_cell(t, "l", vec(t, {x}), {vec(t, {h}), vec(t, {c})});
  CHECK(t.scalar(st.c) == doctest::Approx(c2).epsilon(1e-14));
  CHECK(t.scalar(st.h) == doctest::Approx(o * std::tanh(c2)).epsilon(1e-14));
  CHECK(t.scalar(st.h) == doctest::Approx(0.3354155581819695).epsilon(1e-14));
}

TEST_CASE("saturated forget and input gates carry the cell state unchanged") {
  ParamStore s;
  declare_cell(s, "l", CellKind::Lstm, 2, 2);
  testing::randomize(s, 3);
  s.set("l.W_f", Tensor({2, 2}, 0.0));
  s.set("l.U_f", Tensor({2, 2}, 0.0));
  s.set("l.b_f", Tensor::vector({800.0, 800.0}));
  s.set("l.W_i", Tensor({2, 2}, 0.0));
  s.set("l.U_i", Tensor({2, 2}, 0.0));
  s.set("l.b_i", Tensor::vector({-800.0, -800.0}));
  Tape t(s, {});
  Var c_prev = vec(t, {0.37, -1.25});
  auto st = lstm_cell(t, "l", vec(t, {0.5, 0.2}), {vec(t, {0.1, 0.9}), c_prev});
  CHECK(t.value(st.c) == t.value(c_prev));
}

TEST_CASE("bidirectional encoding keeps length and width 2h") {
  ParamStore s;
  declare_bidirectional(s, "bi", CellKind::Gru, 3, 50);
  s.init_glorot(1);
  Rng rng(2);
  for (std::size_t len = 1; len <= 32; ++len) {
    Tape t(s, {});
    std::vector<Var> seq;
    for (std::size_t i = 0; i < len; ++i) seq.push_back(t.constant(testing::random_tensor(rng, {3})));
    auto out = bidirectional_encode(t, "bi", CellKind::Gru, seq);
    CHECK(out.size() == len);
    CHECK(t.value(out.front()).size() == 100);
  }
  Tape t(s, {});
  CHECK_THROWS_AS(bidirectional_encode(t, "bi", CellKind::Gru, {}), EmptyInputError);
}

TEST_CASE("length-1 bidirectional output is one cell step per direction") {
  ParamStore s;
  declare_bidirectional(s, "bi", CellKind::Lstm, 2, 3);
  testing::randomize(s, 5);
  Tape t(s, {});
  Var x = vec(t, {0.3, -0.8});
  auto out = bidirectional_encode(t, "bi", CellKind::Lstm, std::vector<Var>{x});
  auto f = lstm_cell(t, "bi.fwd", x, {zero_state(t, 3), zero_state(t, 3)});
  auto b = lstm_cell(t, "bi.bwd", x, {zero_state(t, 3), zero_state(t, 3)});
  const auto& o = t.value(out[0]);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(o[i] == t.value(f.h)[i]);
    CHECK(o[3 + i] == t.value(b.h)[i]);
  }
}

TEST_CASE("palindromic input with shared directions mirrors its output") {
  ParamStore s;
  declare_bidirectional(s, "bi", CellKind::Gru, 2, 3);
  testing::randomize(s, 9);
  for (const auto& info : s.infos()) {
    if (info.path.rfind("bi.fwd.", 0) != 0) continue;
    const std::string twin = "bi.bwd." + info.path.substr(7);
    s.set(twin, s.tensor(s.id(info.path)));
  }
  Tape t(s, {});
  Var a = vec(t, {0.5, -0.2}), b = vec(t, {-1.0, 0.8});
  auto out = bidirectional_encode(t, "bi", CellKind::Gru, std::vector<Var>{a, b, a});
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& x = t.value(out[i]);
    const auto& y = t.value(out[2 - i]);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(x[k] == doctest::Approx(y[3 + k]).epsilon(1e-15));
      CHECK(x[3 + k] == doctest::Approx(y[k]).epsilon(1e-15));
    }
  }
}

TEST_CASE("attention over a single item has weight one") {
  ParamStore s;
  declare_attention(s, "att", 4, 3);
  testing::randomize(s, 4);
  Tape t(s, {});
  Var h = vec(t, {0.1, 0.2, -0.3, 0.4});
  auto pool = additive_attention_pool(t, "att", std::vector<Var>{h});
  CHECK(t.scalar(pool.weights) == 1.0);
  CHECK(t.value(pool.pooled) == t.value(h));
}

TEST_CASE("attention with zero score vector is a uniform mean") {
  ParamStore s;
  declare_attention(s, "att", 2, 3);
  testing::randomize(s, 4);
  s.set("att.U", Tensor({1, 3}, 0.0));
  Tape t(s, {});
  std::vector<Var> items{vec(t, {1, 2}), vec(t, {3, -4}), vec(t, {5, 0})};
  auto pool = additive_attention_pool(t, "att", items);
  for (double w : t.value(pool.weights).data()) CHECK(w == doctest::Approx(1.0 / 3));
  CHECK(t.value(pool.pooled)[0] == doctest::Approx(3.0));
  CHECK(t.value(pool.pooled)[1] == doctest::Approx(-2.0 / 3));
}

TEST_CASE("attention weights follow the softmax of hand-set scores") {
  // W = identity (1x1), b = 0, U chosen so that scores U*tanh(h) are 1, 2, 3.
  ParamStore s;
  declare_attention(s, "att", 1, 1);
  s.set("att.W", Tensor({1, 1}, 1.0));
  s.set("att.U", Tensor({1, 1}, 4.0));
  Tape t(s, {});
  std::vector<Var> items;
  for (double score : {1.0, 2.0, 3.0}) items.push_back(vec(t, {std::atanh(score / 4.0)}));
  auto pool = additive_attention_pool(t, "att", items);
  const auto& w = t.value(pool.weights);
  CHECK(w[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(w[2] == doctest::Approx(0.6652409557748219).epsilon(1e-12));
}

TEST_CASE("cross entropy contract") {
  CHECK(cross_entropy(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(cross_entropy(1.0, 1) <= 1.2e-7);
  CHECK(cross_entropy(1.0 - 1e-12, 1) <= 1.2e-7);
  CHECK(cross_entropy(0.9, 0) == doctest::Approx(2.302585092994046).epsilon(1e-12));
  CHECK(std::isfinite(cross_entropy(0.0, 1)));
  CHECK_THROWS_AS(cross_entropy(0.5, 2), LabelError);
}

TEST_CASE("recurrent and attention layers pass gradcheck") {
  for (auto kind : {CellKind::Gru, CellKind::Lstm}) {
    ParamStore s;
    declare_bidirectional(s, "enc", kind, 3, 4);
    declare_attention(s, "att", 8, 5);
    declare_mlp(s, "mlp", 8, 4);
    testing::randomize(s, 21, 0.6);
    LossFn loss = [kind](ParamStore& st, std::span<double> sink) {
      Tape t(st, sink);
      Rng rng(77);
      std::vector<Var> seq;
      for (int i = 0; i < 4; ++i) seq.push_back(t.constant(testing::random_tensor(rng, {3})));
      auto enc = bidirectional_encode(t, "enc", kind, seq);
      auto pool = additive_attention_pool(t, "att", enc);
      Var p = mlp_probability(t, "mlp", pool.pooled);
      Var l = t.bce(p, 1, kProbabilityClip);
      if (!sink.empty()) t.backward(l);
      return t.scalar(l);
    };
    GradcheckOptions opts;
    opts.samples = 400;
    auto r = gradcheck(s, loss, opts);
    CHECK_MESSAGE(r.passed, r.worst_path << " " << r.max_rel_error);
  }
}

TEST_CASE("attention-only subnetwork gradcheck is tighter") {
  ParamStore s;
  declare_attention(s, "att", 4, 3);
  testing::randomize(s, 31, 0.8);
  LossFn loss = [](ParamStore& st, std::span<double> sink) {
    Tape t(st, sink);
    Rng rng(5);
    std::vector<Var> items;
    for (int i = 0; i < 5; ++i) items.push_back(t.constant(testing::random_tensor(rng, {4})));
    auto pool = additive_attention_pool(t, "att", items);
    Var l = testing::weighted_sum(t, pool.pooled);
    if (!sink.empty()) t.backward(l);
    return t.scalar(l);
  };
  GradcheckOptions opts;
  opts.samples = 1000;
  auto r = gradcheck(s, loss, opts);
  CHECK(r.max_rel_error < 1e-6);
}
