#include "g2p/nn/gradcheck_suite.hpp"

#include <chrono>
#include <iomanip>

#include "g2p/nn/gradcheck.hpp"
#include "g2p/nn/layers.hpp"

namespace g2p {
namespace nn {

namespace {

TensorT<double> rand_tensor(std::vector<int> shape, Rng& rng, double s = 1.0) {
  TensorT<double> t = TensorT<double>::zeros(shape);
  for (double& v : t.data) v = rng.uniform(-s, s);
  return t;
}

Var weighted(GraphT<double>& g, Var out, const TensorT<double>& w) {
  return g.sum_all(g.mul(out, g.input(w)));
}

using LossBuilder = std::function<double(Rng&)>;  // returns max rel error

}  // namespace

SuiteResult run_gradcheck_suite(std::ostream& out, int shapes_per_layer,
                                uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult result;
  Rng root(seed);

  auto run = [&](const std::string& layer, double tolerance, int shapes,
                 const std::function<double(Rng&)>& one_shape) {
    SuiteLine line;
    line.layer = layer;
    line.tolerance = tolerance;
    line.shapes = shapes;
    for (int i = 0; i < shapes; ++i) {
      Rng rng = root.child(std::hash<std::string>{}(layer) + i);
      line.worst = std::max(line.worst, one_shape(rng));
    }
    line.ok = line.worst < tolerance;
    result.ok = result.ok && line.ok;
    result.lines.push_back(line);
    out << (line.ok ? "PASS" : "FAIL") << "  " << std::left << std::setw(18)
        << layer << " shapes=" << shapes << " max_rel_err=" << std::scientific
        << std::setprecision(3) << line.worst << " tol=" << tolerance
        << std::defaultfloat << "\n";
  };

  run("linear", 1e-6, shapes_per_layer, [&](Rng& rng) {
    const int in = 1 + static_cast<int>(rng.below(6));
    const int o = 1 + static_cast<int>(rng.below(6));
    const int b = 1 + static_cast<int>(rng.below(4));
    ParamStoreT<double> ps;
    LinearT<double> lin(ps, "lin", in, o, rng);
    TensorT<double> x = rand_tensor({b, in}, rng);
    TensorT<double> w = rand_tensor({b, o}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             return weighted(g, g.tanh(lin(g, g.input(x))), w);
           }, 1e-5).max_rel_error;
  });

  run("embedding", 1e-6, shapes_per_layer, [&](Rng& rng) {
    const int vocab = 3 + static_cast<int>(rng.below(6));
    const int dim = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(5));
    ParamStoreT<double> ps;
    EmbeddingT<double> emb(ps, "emb", vocab, dim, rng);
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) ids.push_back(static_cast<int>(rng.below(vocab)));
    TensorT<double> w = rand_tensor({n, dim}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             return weighted(g, g.sigmoid(emb(g, ids)), w);
           }, 1e-5).max_rel_error;
  });

  run("gru_cell", 1e-5, shapes_per_layer, [&](Rng& rng) {
    const int in = 1 + static_cast<int>(rng.below(5));
    const int h = 1 + static_cast<int>(rng.below(5));
    const int b = 1 + static_cast<int>(rng.below(3));
    ParamStoreT<double> ps;
    GruCellT<double> cell(ps, "gru", in, h, rng);
    TensorT<double> x = rand_tensor({b, in}, rng);
    TensorT<double> hp = rand_tensor({b, h}, rng);
    TensorT<double> w = rand_tensor({b, h}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             return weighted(g, cell.step(g, g.input(x), g.input(hp)), w);
           }, 1e-5).max_rel_error;
  });

  run("bigru", 1e-5, shapes_per_layer, [&](Rng& rng) {
    const int in = 1 + static_cast<int>(rng.below(4));
    const int h = 1 + static_cast<int>(rng.below(4));
    const int b = 1 + static_cast<int>(rng.below(3));
    const int steps = 1 + static_cast<int>(rng.below(4));
    ParamStoreT<double> ps;
    BiGruT<double> gru(ps, "bg", in, h, rng);
    std::vector<TensorT<double>> xs;
    TensorT<double> mask = TensorT<double>::zeros({b, 1});
    std::vector<std::vector<double>> masks;
    for (int t = 0; t < steps; ++t) {
      xs.push_back(rand_tensor({b, in}, rng));
      std::vector<double> m;
      for (int s = 0; s < b; ++s) m.push_back(rng.below(4) == 0 ? 0.0 : 1.0);
      masks.push_back(m);
    }
    TensorT<double> w = rand_tensor({b, 2 * h}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             std::vector<Var> step_vars, mask_vars;
             for (int t = 0; t < steps; ++t) {
               step_vars.push_back(g.input(xs[t]));
               TensorT<double> m = TensorT<double>::zeros({b, 1});
               for (int s = 0; s < b; ++s) m.data[s] = masks[t][s];
               mask_vars.push_back(g.input(std::move(m)));
             }
             BiGruOut o = gru.run(g, step_vars, &mask_vars);
             Var fin = g.concat_cols({o.final_forward, o.final_backward});
             return weighted(g, fin, w);
           }, 1e-5).max_rel_error;
  });

  run("attention", 1e-5, shapes_per_layer, [&](Rng& rng) {
    const int d = 1 + static_cast<int>(rng.below(5));
    const int b = 1 + static_cast<int>(rng.below(3));
    const int steps = 1 + static_cast<int>(rng.below(4));
    ParamStoreT<double> ps;
    LinearT<double> q_proj(ps, "q", d, d, rng);
    LinearT<double> kv_proj(ps, "kv", d, d, rng);
    TensorT<double> q = rand_tensor({b, d}, rng);
    std::vector<TensorT<double>> kv;
    for (int t = 0; t < steps; ++t) kv.push_back(rand_tensor({b, d}, rng));
    TensorT<double> w = rand_tensor({b, d}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             Var qq = q_proj(g, g.input(q));
             std::vector<Var> ks, vs;
             for (int t = 0; t < steps; ++t) {
               Var x = kv_proj(g, g.input(kv[t]));
               ks.push_back(x);
               vs.push_back(x);
             }
             Var ctx = StepAttention<double>::context(g, qq, ks, vs, nullptr);
             return weighted(g, ctx, w);
           }, 1e-5).max_rel_error;
  });

  run("transformer_block", 1e-4, shapes_per_layer, [&](Rng& rng) {
    const int heads = 1 + static_cast<int>(rng.below(2));
    const int dim = heads * (2 + static_cast<int>(rng.below(3)));
    const int s = 2 + static_cast<int>(rng.below(3));
    const bool cross = rng.below(2) == 0;
    ParamStoreT<double> ps;
    TransformerBlockT<double> block(ps, "blk", dim, heads, 2 * dim, cross, 0.0,
                                    rng);
    TensorT<double> x = rand_tensor({s, dim}, rng, 0.5);
    TensorT<double> mem = rand_tensor({s, dim}, rng, 0.5);
    TensorT<double> w = rand_tensor({s, dim}, rng);
    return grad_check(ps, [&](GraphT<double>& g) {
             std::vector<int> lens = {s};
             Var self_p =
                 g.input(attention_penalty<double>(lens, s, lens, s, cross));
             Var out;
             if (cross) {
               Var cross_p =
                   g.input(attention_penalty<double>(lens, s, lens, s, false));
               out = block.decode(g, g.input(x), 1, s, self_p, g.input(mem), s,
                                  cross_p);
             } else {
               out = block(g, g.input(x), 1, s, self_p);
             }
             return weighted(g, out, w);
           }, 1e-5).max_rel_error;
  });

  run("cross_entropy", 1e-5, shapes_per_layer, [&](Rng& rng) {
    const int classes = 3 + static_cast<int>(rng.below(5));
    const int rows = 1 + static_cast<int>(rng.below(4));
    ParamStoreT<double> ps;
    LinearT<double> proj(ps, "proj", 3, classes, rng);
    TensorT<double> x = rand_tensor({rows, 3}, rng);
    std::vector<int> targets;
    bool any_live = false;
    for (int r = 0; r < rows; ++r) {
      int t = 1 + static_cast<int>(rng.below(classes - 1));
      if (r + 1 == rows && !any_live) t = 1 + static_cast<int>(rng.below(classes - 1));
      if (rng.below(4) == 0 && any_live) t = 0;  // pad row
      if (t != 0) any_live = true;
      targets.push_back(t);
    }
    return grad_check(ps, [&](GraphT<double>& g) {
             return g.cross_entropy(proj(g, g.input(x)), targets, 0);
           }, 1e-5).max_rel_error;
  });

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out << (result.ok ? "PASS" : "FAIL") << "  gradient-check suite in "
      << std::fixed << std::setprecision(1) << result.seconds << "s\n"
      << std::defaultfloat;
  return result;
}

}  // namespace nn
}  // namespace g2p
