#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "g2p/alphabet.hpp"
#include "g2p/nn/checkpoint.hpp"
#include "g2p/nn/gradcheck.hpp"
#include "g2p/nn/layers.hpp"
#include "g2p/nn/optim.hpp"
#include "g2p/rng.hpp"

using namespace g2p;
using namespace g2p::nn;

namespace {

TensorT<double> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  TensorT<double> t = TensorT<double>::zeros(shape);
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

Tensor random_tensor_f(std::vector<int> shape, Rng& rng, float scale = 1.0f) {
  Tensor t = Tensor::zeros(shape);
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-scale, scale));
  return t;
}

// Random-weighted scalar loss so finite differences see every output element.
Var weighted_loss(GraphT<double>& g, Var out, Rng& rng) {
  TensorT<double> w = random_tensor(g.value(out).shape, rng);
  return g.sum_all(g.mul(out, g.input(w)));
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("matmul identity and shape errors") {
  Rng rng(1);
  Graph g;
  Tensor eye = Tensor::zeros({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0f;
  Tensor m = random_tensor_f({3, 3}, rng);
  Var out = g.matmul(g.input(eye), g.input(m));
  for (size_t i = 0; i < m.data.size(); ++i) {
    CHECK(g.value(out).data[i] == doctest::Approx(m.data[i]));
  }
  try {
    g.matmul(g.input(Tensor::zeros({2, 3})), g.input(Tensor::zeros({2, 3})));
    FAIL("expected shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("(2,3)") != std::string::npos);
  }
}

TEST_CASE("softmax uniform rows and row sums") {
  Graph g;
  Var s = g.softmax_rows(g.input(Tensor::zeros({1, 3})));
  for (int c = 0; c < 3; ++c) {
    CHECK(g.value(s).data[c] == doctest::Approx(1.0 / 3));
  }
  Rng rng(2);
  Var r = g.softmax_rows(g.input(random_tensor_f({5, 7}, rng, 4.0f)));
  for (int row = 0; row < 5; ++row) {
    double sum = 0;
    for (int c = 0; c < 7; ++c) {
      const float v = g.value(r).at(row, c);
      CHECK(v >= 0.0f);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("concat shape arithmetic") {
  Graph g;
  Var a = g.input(Tensor::zeros({2, 3}));
  Var b = g.input(Tensor::zeros({2, 5}));
  CHECK(g.value(g.concat_cols({a, b})).shape == std::vector<int>{2, 8});
}

TEST_CASE("forward pass guards against non-finite values") {
  Graph g;
  Tensor bad = Tensor::zeros({1, 2});
  bad.data[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(g.input(std::move(bad)), DataError);
}

TEST_CASE("gru cell with zero parameters halves the previous state") {
  ParamStore ps;
  Rng rng(3);
  GruCell cell(ps, "gru", 4, 3, rng);
  for (auto* p : ps.params()) {
    std::fill(p->value.data.begin(), p->value.data.end(), 0.0f);
  }
  Graph g;
  Tensor h_prev = random_tensor_f({2, 3}, rng);
  Var h = cell.step(g, g.input(Tensor::zeros({2, 4})), g.input(h_prev));
  for (size_t i = 0; i < h_prev.data.size(); ++i) {
    CHECK(g.value(h).data[i] == doctest::Approx(0.5 * h_prev.data[i]));
  }
  // Zero input, zero state, zero params: stays exactly zero.
  Var h0 = cell.step(g, g.input(Tensor::zeros({2, 4})), g.input(Tensor::zeros({2, 3})));
  for (float v : g.value(h0).data) CHECK(v == 0.0f);
}

TEST_CASE("gru cell matches a scalar re-implementation") {
  ParamStoreT<double> ps;
  Rng rng(4);
  GruCellT<double> cell(ps, "gru", 3, 2, rng);
  GraphT<double> g;
  TensorT<double> x = random_tensor({1, 3}, rng);
  TensorT<double> h = random_tensor({1, 2}, rng);
  Var out = cell.step(g, g.input(x), g.input(h));

  const auto& wx = ps.at("gru.wx").value;
  const auto& wh = ps.at("gru.wh").value;
  const auto& bx = ps.at("gru.bx").value;
  const auto& bh = ps.at("gru.bh").value;
  const int H = 2;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int j = 0; j < H; ++j) {
    auto gate = [&](int which) {  // 0=reset, 1=update, 2=candidate pre-acts
      double xg = bx.data[which * H + j];
      double hg = bh.data[which * H + j];
      for (int i = 0; i < 3; ++i) xg += x.data[i] * wx.at(i, which * H + j);
      for (int i = 0; i < H; ++i) hg += h.data[i] * wh.at(i, which * H + j);
      return std::pair<double, double>(xg, hg);
    };
    auto [rx, rh] = gate(0);
    auto [zx, zh] = gate(1);
    auto [nx, nh] = gate(2);
    const double r = sig(rx + rh);
    const double z = sig(zx + zh);
    const double n = std::tanh(nx + r * nh);
    const double expect = z * h.data[j] + (1.0 - z) * n;
    CHECK(g.value(out).data[j] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("bigru basics") {
  Rng rng(5);
  // Length-1 sequence: forward and backward final states see the same step.
  {
    ParamStore ps;
    BiGru gru(ps, "b", 3, 2, rng);
    // Tie the two directions so their outputs are comparable.
    ps.at("b.bwd.wx").value = ps.at("b.fwd.wx").value;
    ps.at("b.bwd.wh").value = ps.at("b.fwd.wh").value;
    ps.at("b.bwd.bx").value = ps.at("b.fwd.bx").value;
    ps.at("b.bwd.bh").value = ps.at("b.fwd.bh").value;
    Graph g;
    std::vector<Var> steps = {g.input(random_tensor_f({2, 3}, rng))};
    BiGruOut out = gru.run(g, steps, nullptr);
    for (size_t i = 0; i < g.value(out.final_forward).data.size(); ++i) {
      CHECK(g.value(out.final_forward).data[i] ==
            doctest::Approx(g.value(out.final_backward).data[i]));
    }
    CHECK_THROWS_AS(gru.run(g, {}, nullptr), DataError);
  }
  // Palindromic input with tied directions: forward states equal the
  // backward states read in reverse.
  {
    ParamStore ps;
    BiGru gru(ps, "b", 3, 2, rng);
    ps.at("b.bwd.wx").value = ps.at("b.fwd.wx").value;
    ps.at("b.bwd.wh").value = ps.at("b.fwd.wh").value;
    ps.at("b.bwd.bx").value = ps.at("b.fwd.bx").value;
    ps.at("b.bwd.bh").value = ps.at("b.fwd.bh").value;
    Graph g;
    Tensor a = random_tensor_f({1, 3}, rng);
    Tensor b = random_tensor_f({1, 3}, rng);
    std::vector<Var> steps = {g.input(a), g.input(b), g.input(a)};
    BiGruOut out = gru.run(g, steps, nullptr);
    const int H = 2;
    for (int t = 0; t < 3; ++t) {
      const Tensor& st = g.value(out.states[t]);
      const Tensor& rt = g.value(out.states[2 - t]);
      for (int j = 0; j < H; ++j) {
        CHECK(st.data[j] == doctest::Approx(rt.data[H + j]));
      }
    }
  }
}

TEST_CASE("bigru equals two independent unidirectional runs") {
  Rng rng(6);
  ParamStore ps;
  BiGru gru(ps, "b", 3, 2, rng);
  Graph g;
  std::vector<Tensor> xs = {random_tensor_f({2, 3}, rng),
                            random_tensor_f({2, 3}, rng),
                            random_tensor_f({2, 3}, rng)};
  std::vector<Var> steps;
  for (const Tensor& x : xs) steps.push_back(g.input(x));
  BiGruOut out = gru.run(g, steps, nullptr);

  // Forward direction, composed step by step from the cell.
  Var h = g.input(Tensor::zeros({2, 2}));
  for (int t = 0; t < 3; ++t) h = gru.fwd.step(g, steps[t], h);
  for (size_t i = 0; i < g.value(h).data.size(); ++i) {
    CHECK(g.value(out.final_forward).data[i] == doctest::Approx(g.value(h).data[i]));
  }
  Var hb = g.input(Tensor::zeros({2, 2}));
  for (int t = 2; t >= 0; --t) hb = gru.bwd.step(g, steps[t], hb);
  for (size_t i = 0; i < g.value(hb).data.size(); ++i) {
    CHECK(g.value(out.final_backward).data[i] ==
          doctest::Approx(g.value(hb).data[i]));
  }
}

TEST_CASE("step attention: single step, uniform weights, formula oracle") {
  Rng rng(7);
  // A single unmasked step returns that step's value.
  {
    Graph g;
    Var q = g.input(random_tensor_f({2, 3}, rng));
    Tensor v0 = random_tensor_f({2, 3}, rng);
    Var ctx = StepAttention<float>::context(g, q, {g.input(random_tensor_f({2, 3}, rng))},
                                            {g.input(v0)}, nullptr);
    for (size_t i = 0; i < v0.data.size(); ++i) {
      CHECK(g.value(ctx).data[i] == doctest::Approx(v0.data[i]));
    }
  }
  // Identical keys spread weight uniformly over unmasked steps.
  {
    Graph g;
    Var q = g.input(random_tensor_f({1, 3}, rng));
    Tensor k = random_tensor_f({1, 3}, rng);
    Tensor v1 = random_tensor_f({1, 3}, rng);
    Tensor v2 = random_tensor_f({1, 3}, rng);
    Var ctx = StepAttention<float>::context(
        g, q, {g.input(k), g.input(k)}, {g.input(v1), g.input(v2)}, nullptr);
    for (size_t i = 0; i < v1.data.size(); ++i) {
      CHECK(g.value(ctx).data[i] ==
            doctest::Approx(0.5 * (v1.data[i] + v2.data[i])));
    }
  }
  // Random case matches an explicit softmax-weighted sum.
  {
    GraphT<double> g;
    Rng r2(8);
    TensorT<double> q = random_tensor({1, 4}, r2);
    std::vector<TensorT<double>> ks, vs;
    std::vector<Var> kv, vv;
    for (int t = 0; t < 3; ++t) {
      ks.push_back(random_tensor({1, 4}, r2));
      vs.push_back(random_tensor({1, 4}, r2));
      kv.push_back(g.input(ks.back()));
      vv.push_back(g.input(vs.back()));
    }
    Var ctx = StepAttention<double>::context(g, g.input(q), kv, vv, nullptr);
    std::vector<double> scores(3);
    double zmax = -1e30;
    for (int t = 0; t < 3; ++t) {
      double dot = 0;
      for (int i = 0; i < 4; ++i) dot += q.data[i] * ks[t].data[i];
      scores[t] = dot / std::sqrt(4.0);
      zmax = std::max(zmax, scores[t]);
    }
    double z = 0;
    for (int t = 0; t < 3; ++t) z += std::exp(scores[t] - zmax);
    for (int i = 0; i < 4; ++i) {
      double expect = 0;
      for (int t = 0; t < 3; ++t) {
        expect += std::exp(scores[t] - zmax) / z * vs[t].data[i];
      }
      CHECK(g.value(ctx).data[i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  // An all-masked sample is an error.
  {
    Graph g;
    Var q = g.input(random_tensor_f({1, 3}, rng));
    Var k = g.input(random_tensor_f({1, 3}, rng));
    Var m = g.input(Tensor::zeros({1, 1}));
    std::vector<Var> mask = {m};
    CHECK_THROWS_AS(
        StepAttention<float>::context(g, q, {k}, {k}, &mask), DataError);
  }
}

TEST_CASE("transformer block causality and pad independence") {
  Rng rng(9);
  ParamStore ps;
  Rng lr = rng.child(1);
  TransformerBlock block(ps, "blk", 8, 2, 16, false, 0.0, lr);
  const int S = 5;
  Tensor x = random_tensor_f({S, 8}, rng);

  auto run = [&](const Tensor& input, bool causal, const std::vector<int>& lens) {
    Graph g;
    Var penalty = g.input(attention_penalty<float>(lens, S, lens, S, causal));
    Var out = block(g, g.input(input), 1, S, penalty);
    return g.value(out);
  };

  // Causal: output at step t ignores perturbations at steps > t.
  Tensor perturbed = x;
  for (int d = 0; d < 8; ++d) perturbed.at(4, d) += 1.0f;
  Tensor a = run(x, true, {S});
  Tensor b = run(perturbed, true, {S});
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < 8; ++d) CHECK(a.at(t, d) == b.at(t, d));
  }
  // Pad positions do not affect unpadded outputs.
  Tensor pad_perturbed = x;
  for (int d = 0; d < 8; ++d) pad_perturbed.at(4, d) += 2.0f;
  Tensor c = run(x, false, {4});
  Tensor d2 = run(pad_perturbed, false, {4});
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < 8; ++d) CHECK(c.at(t, d) == d2.at(t, d));
  }
  // Width must divide across heads.
  ParamStore ps2;
  CHECK_THROWS_AS(TransformerBlock(ps2, "bad", 9, 2, 16, false, 0.0, lr),
                  ShapeError);
}

TEST_CASE("cross entropy: uniform, one-hot, direct formula") {
  Graph g;
  // Uniform logits over V classes: loss = ln V.
  Var u = g.cross_entropy(g.input(Tensor::zeros({2, 7})), {1, 3}, 0);
  CHECK(g.value(u).data[0] == doctest::Approx(std::log(7.0)));
  // Extreme correct logits: loss tends to zero.
  Tensor hot = Tensor::zeros({1, 4});
  hot.at(0, 2) = 50.0f;
  Var h = g.cross_entropy(g.input(hot), {2}, 0);
  CHECK(g.value(h).data[0] == doctest::Approx(0.0).epsilon(1e-6));
  // Random case matches the direct formula, ignoring pad rows.
  Rng rng(10);
  Tensor logits = random_tensor_f({3, 5}, rng, 2.0f);
  std::vector<int> targets = {4, 0, 2};  // middle row is PAD (ignore id 0)
  Var ce = g.cross_entropy(g.input(logits), targets, 0);
  double expect = 0;
  int count = 0;
  for (int r = 0; r < 3; ++r) {
    if (targets[r] == 0) continue;
    double m = logits.at(r, 0);
    for (int c = 1; c < 5; ++c) m = std::max(m, static_cast<double>(logits.at(r, c)));
    double z = 0;
    for (int c = 0; c < 5; ++c) z += std::exp(logits.at(r, c) - m);
    expect -= logits.at(r, targets[r]) - m - std::log(z);
    ++count;
  }
  CHECK(g.value(ce).data[0] == doctest::Approx(expect / count).epsilon(1e-5));
  CHECK_THROWS_AS(g.cross_entropy(g.input(Tensor::zeros({1, 3})), {0}, 0),
                  DataError);
}

TEST_CASE("adam: zero gradient, first-step magnitude, quadratic descent") {
  Rng rng(11);
  // Zero gradient leaves parameters unchanged.
  {
    ParamStore ps;
    Param* p = ps.create("w", {2, 2}, 4, rng);
    Tensor before = p->value;
    Adam adam(ps, {});
    ps.zero_grads();
    adam.step();
    for (size_t i = 0; i < before.data.size(); ++i) {
      CHECK(p->value.data[i] == before.data[i]);
    }
  }
  // Constant gradient, step 1: update magnitude is about the learning rate.
  {
    ParamStore ps;
    Param* p = ps.create_const("w", {1, 1}, 1.0f);
    AdamConfig cfg;
    cfg.lr = 1e-3;
    cfg.clip = 0;
    Adam adam(ps, cfg);
    p->grad.data[0] = 0.37f;
    adam.step();
    CHECK(std::abs(1.0f - p->value.data[0]) ==
          doctest::Approx(1e-3).epsilon(1e-3));
  }
  // 100 steps on f(w) = w^2 from w=1: |w| decreases monotonically after
  // warm-up, and the trajectory matches an independent scalar simulation.
  {
    ParamStore ps;
    Param* p = ps.create_const("w", {1, 1}, 1.0f);
    AdamConfig cfg;
    cfg.lr = 0.01;
    cfg.clip = 0;
    Adam adam(ps, cfg);
    double m = 0, v = 0, w = 1.0;
    double prev = 1.0;
    for (int t = 1; t <= 100; ++t) {
      p->grad.data[0] = 2.0f * p->value.data[0];
      adam.step();
      // scalar oracle
      const double grad = 2.0 * w;
      m = 0.9 * m + 0.1 * grad;
      v = 0.999 * v + 0.001 * grad * grad;
      const double mh = m / (1.0 - std::pow(0.9, t));
      const double vh = v / (1.0 - std::pow(0.999, t));
      w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(p->value.data[0] == doctest::Approx(w).epsilon(1e-4));
      if (t > 1) CHECK(std::abs(p->value.data[0]) <= std::abs(prev) + 1e-7);
      prev = p->value.data[0];
    }
    CHECK(std::abs(p->value.data[0]) < 0.7);
  }
}

TEST_CASE("gradient checks per layer on randomized small shapes") {
  Rng shape_rng(12);
  // Linear layers, 20 random shapes, tolerance 1e-6.
  for (int iter = 0; iter < 20; ++iter) {
    const int in = 1 + static_cast<int>(shape_rng.below(5));
    const int out = 1 + static_cast<int>(shape_rng.below(5));
    const int batch = 1 + static_cast<int>(shape_rng.below(3));
    ParamStoreT<double> ps;
    Rng r = shape_rng.child(iter);
    LinearT<double> lin(ps, "lin", in, out, r);
    TensorT<double> x = random_tensor({batch, in}, r);
    Rng wr = shape_rng.child(1000 + iter);
    auto report = grad_check(
        ps,
        [&](GraphT<double>& g) {
          Rng w = wr;
          return weighted_loss(g, g.tanh(lin(g, g.input(x))), w);
        },
        1e-5);
    CHECK(report.max_rel_error < 1e-6);
  }
  // GRU cell, tolerance 1e-5.
  for (int iter = 0; iter < 20; ++iter) {
    const int in = 1 + static_cast<int>(shape_rng.below(4));
    const int hidden = 1 + static_cast<int>(shape_rng.below(4));
    const int batch = 1 + static_cast<int>(shape_rng.below(3));
    ParamStoreT<double> ps;
    Rng r = shape_rng.child(100 + iter);
    GruCellT<double> cell(ps, "gru", in, hidden, r);
    TensorT<double> x = random_tensor({batch, in}, r);
    TensorT<double> h = random_tensor({batch, hidden}, r);
    Rng wr = shape_rng.child(2000 + iter);
    auto report = grad_check(
        ps,
        [&](GraphT<double>& g) {
          Rng w = wr;
          return weighted_loss(g, cell.step(g, g.input(x), g.input(h)), w);
        },
        1e-5);
    CHECK(report.max_rel_error < 1e-5);
  }
  // Transformer block with cross-attention, tolerance 1e-4.
  for (int iter = 0; iter < 5; ++iter) {
    const int heads = 1 + static_cast<int>(shape_rng.below(2));
    const int dim = heads * (2 + static_cast<int>(shape_rng.below(2)));
    const int S = 2 + static_cast<int>(shape_rng.below(3));
    ParamStoreT<double> ps;
    Rng r = shape_rng.child(200 + iter);
    TransformerBlockT<double> block(ps, "blk", dim, heads, dim * 2, true, 0.0, r);
    TensorT<double> x = random_tensor({S, dim}, r, 0.5);
    TensorT<double> mem = random_tensor({S, dim}, r, 0.5);
    Rng wr = shape_rng.child(3000 + iter);
    auto report = grad_check(
        ps,
        [&](GraphT<double>& g) {
          Rng w = wr;
          std::vector<int> lens = {S};
          Var self_p = g.input(attention_penalty<double>(lens, S, lens, S, true));
          Var cross_p = g.input(attention_penalty<double>(lens, S, lens, S, false));
          Var out = block.decode(g, g.input(x), 1, S, self_p, g.input(mem), S,
                                 cross_p);
          return weighted_loss(g, out, w);
        },
        1e-5);
    CHECK(report.max_rel_error < 1e-4);
  }
  // Embedding + cross-entropy composition.
  for (int iter = 0; iter < 10; ++iter) {
    const int vocab = 4 + static_cast<int>(shape_rng.below(4));
    const int dim = 2 + static_cast<int>(shape_rng.below(3));
    ParamStoreT<double> ps;
    Rng r = shape_rng.child(300 + iter);
    EmbeddingT<double> emb(ps, "emb", vocab, dim, r);
    LinearT<double> proj(ps, "proj", dim, vocab, r);
    std::vector<int> ids = {1, 2, static_cast<int>(shape_rng.below(vocab))};
    std::vector<int> targets = {2, 0, 1};  // one pad row (ignore id 0)
    auto report = grad_check(
        ps,
        [&](GraphT<double>& g) {
          Var e = emb(g, ids);
          return g.cross_entropy(proj(g, e), targets, 0);
        },
        1e-5);
    CHECK(report.max_rel_error < 1e-5);
  }
}

TEST_CASE("checkpoint round trip, truncation, fingerprint") {
  Rng rng(14);
  Checkpoint ck;
  ck.alphabet_fingerprint = 0xABCDEF0123456789ull;
  ck.config = {{"model", "test"}, {"dim", 4}};
  Param* w = ck.params.create("w", {3, 4}, 4, rng);
  Param* b = ck.params.create_const("b", {1, 4}, 0.5f);
  const std::string bytes = ck.serialize();

  Checkpoint back = Checkpoint::deserialize(bytes);
  CHECK(back.alphabet_fingerprint == ck.alphabet_fingerprint);
  CHECK(back.config == ck.config);
  CHECK(back.params.at("w").value.shape == w->value.shape);
  for (size_t i = 0; i < w->value.data.size(); ++i) {
    CHECK(back.params.at("w").value.data[i] == w->value.data[i]);
  }
  CHECK(back.params.at("b").value.data[0] == b->value.data[0]);
  CHECK(back.serialize() == bytes);  // byte-exact

  for (size_t cut : {size_t(4), bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(Checkpoint::deserialize(bytes.substr(0, cut)),
                    CheckpointError);
  }
  CHECK_THROWS_AS(Checkpoint::deserialize("JUNKJUNKJUNKJUNK"), CheckpointError);

  const std::string path = temp_path("g2p_test_ck.bin");
  ck.save(path);
  CHECK_THROWS_AS(Checkpoint::load(path, /*expected=*/1), CheckpointError);
  Checkpoint ok = Checkpoint::load(path, ck.alphabet_fingerprint);
  CHECK(ok.params.at("w").value.data == w->value.data);
  std::filesystem::remove(path);
}

TEST_CASE("seeded initialization and updates are bit-identical") {
  auto build = [](uint64_t seed) {
    ParamStore ps;
    Rng rng(seed);
    Linear l1(ps, "l1", 8, 8, rng);
    Linear l2(ps, "l2", 8, 4, rng);
    return std::pair<ParamStore, int>(std::move(ps), 0);
  };
  auto [a, ai] = build(42);
  auto [b, bi] = build(42);
  auto [c, ci] = build(43);
  bool ab_same = true, ac_same = true;
  for (auto* p : a.params()) {
    const Param* q = b.find(p->name);
    const Param* r = c.find(p->name);
    for (size_t i = 0; i < p->value.data.size(); ++i) {
      ab_same = ab_same && p->value.data[i] == q->value.data[i];
      ac_same = ac_same && p->value.data[i] == r->value.data[i];
    }
  }
  CHECK(ab_same);
  CHECK_FALSE(ac_same);
}
