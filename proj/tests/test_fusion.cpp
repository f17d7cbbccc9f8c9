#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "ember/error.hpp"
#include "ember/model/fusion.hpp"
#include "ember/numerics/gradcheck.hpp"
#include "ember/numerics/layers.hpp"
#include "test_support.hpp"

using namespace ember;
using namespace ember::model;
using namespace ember::num;

namespace {

EncodedComponent component(Tape& t, Component kind, const std::vector<std::vector<double>>& cols) {
  EncodedComponent c;
  c.kind = kind;
  for (const auto& v : cols) c.vectors.push_back(t.constant(Tensor({v.size()}, v)));
  c.mask.assign(cols.size(), 1);
  return c;
}

EncodedComponent random_component(Tape& t, Rng& rng, Component kind, std::size_t n,
                                   std::size_t width) {
  EncodedComponent c;
  c.kind = kind;
  for (std::size_t i = 0; i < n; ++i) c.vectors.push_back(t.constant(testing::random_tensor(rng, {width})));
  c.mask.assign(n, 1);
  return c;
}

std::vector<double> values(const Tape& t, Var v) {
  const auto d = t.value(v).data();
  return {d.begin(), d.end()};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = a.size() == b.size() ? 0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ParamStore pair_store(std::size_t width, std::size_t k) {
  ParamStore s;
  declare_coattention(s, "p", width, k);
  return s;
}

}  // namespace

TEST_CASE("co-attention 2x2 reference instance") {
  // h = 1 (width 2), k = 1; reference values computed independently from the
  // affinity, hidden map, softmax and pooling formulas.
  ParamStore s = pair_store(2, 1);
  s.set("p.W_m", Tensor({2, 2}, {0.2, -0.1, 0.4, 0.3}));
  s.set("p.W_D", Tensor({1, 2}, {0.5, -0.3}));
  s.set("p.W_E", Tensor({1, 2}, {0.2, 0.6}));
  s.set("p.w_DE", Tensor({1, 1}, {1.5}));
  s.set("p.w_ED", Tensor({1, 1}, {-0.8}));
  Tape t(s, {});
  const auto d = component(t, Component::Headline, {{0.5, -0.2}, {0.1, 0.4}});
  const auto e = component(t, Component::Image, {{0.3, 0.7}, {-0.6, 0.2}});
  const auto o = co_attention(t, "p", d, e);

  const std::vector<double> A{0.13320368430254775, 0.10560477088938737, -0.04397162730494583,
                              0.043971627304945846};
  CHECK(t.value(o.affinity).rows() == 2);
  CHECK(max_diff(values(t, o.affinity), A) < 1e-10);
  CHECK(max_diff(values(t, o.a_d), {0.6376335621272221, 0.36236643787277784}) < 1e-10);
  CHECK(max_diff(values(t, o.a_e), {0.40329626697092763, 0.5967037330290724}) < 1e-10);
  CHECK(max_diff(values(t, o.o_d_e), {0.35505342485088887, 0.017419862723666704}) < 1e-10);
  CHECK(max_diff(values(t, o.o_e_d), {-0.23703335972616518, 0.4016481334854638}) < 1e-10);
  CHECK(max_diff(values(t, o.o_de), {0.35505342485088887, 0.017419862723666704,
                                     -0.23703335972616518, 0.4016481334854638}) < 1e-10);
  CHECK(o.pair.letters() == "HI");
}

TEST_CASE("co-attention degeneracies") {
  Rng rng(3);
  const std::size_t w = 4, k = 3;

  SUBCASE("W_m = 0 and w_DE = 0: zero affinity, uniform weights, mean pooling") {
    ParamStore s = pair_store(w, k);
    testing::randomize(s, 4, 1.0);
    for (auto& v : s.value("p.W_m")) v = 0;
    for (auto& v : s.value("p.w_DE")) v = 0;
    Tape t(s, {});
    const auto d = random_component(t, rng, Component::Body, 3, w);
    const auto e = random_component(t, rng, Component::Comment, 2, w);
    const auto o = co_attention(t, "p", d, e);
    for (double a : values(t, o.affinity)) CHECK(a == 0.0);
    for (double a : values(t, o.a_d)) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-15));
    std::vector<double> mean(w, 0.0);
    for (Var v : d.vectors)
      for (std::size_t i = 0; i < w; ++i) mean[i] += t.value(v)[i] / 3.0;
    CHECK(max_diff(values(t, o.o_d_e), mean) < 1e-15);
  }

  SUBCASE("single position: weight 1 and the vector itself") {
    for (int trial = 0; trial < 5; ++trial) {
      ParamStore s = pair_store(w, k);
      testing::randomize(s, 10 + trial, 3.0);
      Tape t(s, {});
      const auto d = random_component(t, rng, Component::Headline, 1, w);
      const auto e = random_component(t, rng, Component::Body, 4, w);
      const auto o = co_attention(t, "p", d, e);
      CHECK(values(t, o.a_d) == std::vector<double>{1.0});
      CHECK(values(t, o.o_d_e) == values(t, d.vectors[0]));
    }
  }

  SUBCASE("zero parameters") {
    ParamStore s = pair_store(w, k);
    Tape t(s, {});
    const auto d = random_component(t, rng, Component::Image, 2, w);
    const auto e = random_component(t, rng, Component::Comment, 5, w);
    const auto o = co_attention(t, "p", d, e);
    for (double a : values(t, o.affinity)) CHECK(a == 0.0);
    for (double a : values(t, o.a_d)) CHECK(a == 0.5);
    for (double a : values(t, o.a_e)) CHECK(a == doctest::Approx(0.2).epsilon(1e-15));
  }

  SUBCASE("width mismatch") {
    ParamStore s = pair_store(w, k);
    Tape t(s, {});
    const auto d = random_component(t, rng, Component::Image, 2, w);
    const auto e = random_component(t, rng, Component::Comment, 2, w + 1);
    CHECK_THROWS_AS(co_attention(t, "p", d, e), DimensionError);
  }
}

TEST_CASE("co-attention permutation property") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t w = 2 + rng.index(5), k = 1 + rng.index(5);
    const std::size_t n = 1 + rng.index(6), q = 1 + rng.index(6);
    ParamStore s = pair_store(w, k);
    testing::randomize(s, 500 + trial, 1.5);
    Tape t(s, {});
    const auto d = random_component(t, rng, Component::Headline, n, w);
    const auto e = random_component(t, rng, Component::Body, q, w);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    EncodedComponent dp = d;
    for (std::size_t i = 0; i < n; ++i) dp.vectors[i] = d.vectors[perm[i]];

    const auto o = co_attention(t, "p", d, e);
    const auto op = co_attention(t, "p", dp, e);
    const auto a = values(t, o.a_d), ap = values(t, op.a_d);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(ap[i] - a[perm[i]]));
    CHECK(err < 1e-10);
    CHECK(max_diff(values(t, o.o_d_e), values(t, op.o_d_e)) < 1e-10);
    CHECK(max_diff(values(t, o.o_e_d), values(t, op.o_e_d)) < 1e-10);
    CHECK(max_diff(values(t, o.a_e), values(t, op.a_e)) < 1e-10);
  }
}

TEST_CASE("pair order follows the reading sequence") {
  auto letters = [](const std::vector<ComponentPair>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.letters());
    return out;
  };
  CHECK(letters(pair_order(ReadingOrder::parse("HICB"))) ==
        std::vector<std::string>{"HI", "HC", "IC", "HB", "IB", "CB"});
  CHECK(letters(pair_order(ReadingOrder::parse("HIC"))) ==
        std::vector<std::string>{"HI", "HC", "IC"});
  CHECK(letters(pair_order(ReadingOrder::parse("HI"))) == std::vector<std::string>{"HI"});
  for (const char* o : {"HICB", "BCIH", "ICB", "CB"}) {
    const auto order = ReadingOrder::parse(o);
    const auto pairs = pair_order(order);
    const std::size_t n = order.size();
    CHECK(pairs.size() == n * (n - 1) / 2);
    for (Component c : order.components())
      CHECK(std::count_if(pairs.begin(), pairs.end(), [&](auto& p) { return p.involves(c); }) ==
            static_cast<long>(n - 1));
  }
  CHECK_THROWS_AS(ReadingOrder::parse("H"), ConfigError);
  CHECK_THROWS_AS(ReadingOrder::parse("HIH"), ConfigError);
  CHECK_THROWS_AS(ReadingOrder::parse("HX"), ConfigError);
}

TEST_CASE("refinement features") {
  Rng rng(31);
  const std::size_t h = 2, w = 2 * h;
  auto build = [&](const std::string& order_letters) {
    ModelConfig cfg;
    cfg.hidden = h;
    cfg.order = ReadingOrder::parse(order_letters);
    ParamStore s;
    declare_fusion(s, cfg);
    testing::randomize(s, 32, 1.0);
    return std::pair{cfg, s};
  };

  for (const char* o : {"HICB", "HIC", "HI"}) {
    auto [cfg, s] = build(o);
    Tape t(s, {});
    std::vector<EncodedComponent> comps;
    for (Component c : cfg.order.components())
      comps.push_back(random_component(t, rng, c, 1 + rng.index(3), w));
    std::vector<CoAttentionOutput> outs;
    for (const auto& p : cfg.active_pairs())
      outs.push_back(co_attention(t, coattention_prefix(p), comps[cfg.order.rank(p.first)],
                                  comps[cfg.order.rank(p.second)]));
    const Var r = refinement_features(t, outs, cfg.order);
    const std::size_t n = cfg.order.size();
    CHECK(t.value(r).size() == (n - 1) * w);
    // Expected: the last component's side of each pair, partners in reading order.
    std::vector<double> expect;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const ComponentPair p{cfg.order.components()[i], cfg.order.last()};
      auto it = std::find_if(outs.begin(), outs.end(), [&](auto& x) { return x.pair == p; });
      REQUIRE(it != outs.end());
      const auto v = values(t, it->o_e_d);
      expect.insert(expect.end(), v.begin(), v.end());
    }
    CHECK(values(t, r) == expect);
  }

  SUBCASE("a reordered sequence keeps partner order") {
    auto [cfg, s] = build("HICB");
    cfg.pair_sequence = parse_pairs("CB,IB,HB,HI,HC,IC", cfg.order);
    const auto rp = cfg.refinement_pairs();
    REQUIRE(rp.size() == 3);
    CHECK(rp[0].letters() == "HB");
    CHECK(rp[1].letters() == "IB");
    CHECK(rp[2].letters() == "CB");
  }
}

TEST_CASE("backward aggregation") {
  const std::size_t h = 2, in = 4 * h, a = 4 * h;
  ModelConfig cfg;
  cfg.hidden = h;
  ParamStore s;
  declare_fusion(s, cfg);
  testing::randomize(s, 41, 0.7);
  Rng rng(42);

  SUBCASE("single element is one GRU step from zero") {
    Tape t(s, {});
    const Var x = t.constant(testing::random_tensor(rng, {in}));
    const Var got = aggregate(t, Aggregator::BackwardGru, std::vector<Var>{x});
    const Var expect = gru_cell(t, "agg.gru", x, zero_state(t, a));
    CHECK(values(t, got) == values(t, expect));
  }

  SUBCASE("the last element enters the recurrence first") {
    Tape t(s, {});
    const Var x1 = t.constant(testing::random_tensor(rng, {in}));
    const Var x2 = t.constant(testing::random_tensor(rng, {in}));
    const Var got = aggregate(t, Aggregator::BackwardGru, std::vector<Var>{x1, x2});
    const Var expect = gru_cell(t, "agg.gru", x1, gru_cell(t, "agg.gru", x2, zero_state(t, a)));
    CHECK(values(t, got) == values(t, expect));
    const Var reversed = aggregate(t, Aggregator::BackwardGru, std::vector<Var>{x2, x1});
    CHECK(max_diff(values(t, got), values(t, reversed)) > 1e-6);
  }

  SUBCASE("zero parameters give zero") {
    ParamStore z;
    declare_fusion(z, cfg);
    Tape t(z, {});
    std::vector<Var> seq;
    for (int i = 0; i < 6; ++i) seq.push_back(t.constant(testing::random_tensor(rng, {in})));
    for (double v : values(t, aggregate(t, Aggregator::BackwardGru, seq))) CHECK(v == 0.0);
  }

  SUBCASE("alternative aggregators") {
    for (auto kind : {Aggregator::Concat, Aggregator::Attention, Aggregator::BiGru}) {
      ModelConfig c = cfg;
      c.aggregator = kind;
      ParamStore p;
      declare_fusion(p, c);
      testing::randomize(p, 43, 0.7);
      Tape t(p, {});
      std::vector<Var> seq;
      for (int i = 0; i < 6; ++i) seq.push_back(t.constant(testing::random_tensor(rng, {in})));
      CHECK(t.value(aggregate(t, kind, seq)).size() == c.fea_gru_width());
    }
    ModelConfig c = cfg;
    c.aggregator = Aggregator::Concat;
    CHECK(c.fea_gru_width() == 6 * in);
  }
}

TEST_CASE("gradcheck through co-attention and aggregation") {
  ModelConfig cfg;
  cfg.hidden = 2;
  cfg.coattention = 3;
  cfg.order = ReadingOrder::parse("HIC");
  ParamStore s;
  declare_fusion(s, cfg);
  testing::randomize(s, 51, 0.8);
  LossFn loss = [&](ParamStore& st, std::span<double> sink) {
    Tape t(st, sink);
    Rng rng(52);
    std::vector<EncodedComponent> comps;
    for (Component c : cfg.order.components())
      comps.push_back(random_component(t, rng, c, 1 + rng.index(3), cfg.width()));
    std::vector<Var> seq;
    std::vector<CoAttentionOutput> outs;
    for (const auto& p : cfg.active_pairs()) {
      outs.push_back(co_attention(t, coattention_prefix(p), comps[cfg.order.rank(p.first)],
                                  comps[cfg.order.rank(p.second)]));
      seq.push_back(outs.back().o_de);
    }
    const Var fea = aggregate(t, cfg.aggregator, seq);
    const Var total = t.add(testing::weighted_sum(t, fea),
                            testing::weighted_sum(t, refinement_features(t, outs, cfg.order), 7));
    t.backward(total);
    return t.scalar(total);
  };
  GradcheckOptions opts;
  opts.samples = 400;
  const auto r = gradcheck(s, loss, opts);
  CHECK_MESSAGE(r.passed, r.worst_path << " " << r.max_rel_error);
}

TEST_CASE("diagnostics export") {
  ParamStore s = pair_store(2, 1);
  testing::randomize(s, 61, 1.0);
  Tape t(s, {});
  Rng rng(62);
  const auto d = random_component(t, rng, Component::Headline, 3, 2);
  const auto e = random_component(t, rng, Component::Image, 2, 2);
  const std::vector<CoAttentionOutput> outs{co_attention(t, "p", d, e)};
  const auto j = coattention_diagnostics(t, outs);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["pair"] == "HI");
  CHECK(j[0]["A"].size() == 2);
  CHECK(j[0]["A"][0].size() == 3);
  CHECK(j[0]["a_D"].size() == 3);
  CHECK(j[0]["a_E"].size() == 2);
}

TEST_CASE("model configuration checks") {
  ModelConfig c;
  c.dropped_pairs = {parse_pair("HB", c.order)};
  CHECK(c.active_pairs().size() == 5);
  CHECK(c.refinement_pairs().size() == 2);
  c.pair_sequence = parse_pairs("HI,HC,IC", c.order);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ModelConfig j = ModelConfig::from_json(ModelConfig{}.to_json());
  CHECK(j.to_json() == ModelConfig{}.to_json());
  CHECK(ModelConfig{}.k() == 100);
  CHECK(ModelConfig{}.pair_width() == 200);
}
