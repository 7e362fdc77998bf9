#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "g2p/nn/graph.hpp"

namespace g2p {
namespace nn {

// Layers register their parameters in a ParamStore at construction and build
// graph nodes on demand, so the same definitions serve float training and
// double gradient checking.

template <typename T>
struct LinearT {
  ParamT<T>* w = nullptr;
  ParamT<T>* b = nullptr;

  LinearT() = default;
  LinearT(ParamStoreT<T>& ps, const std::string& name, int in, int out,
          Rng& rng) {
    w = ps.create(name + ".w", {in, out}, in, rng);
    b = ps.create(name + ".b", {1, out}, 0, rng);
  }

  Var operator()(GraphT<T>& g, Var x) const {
    return g.add_bias(g.matmul(x, g.param(w)), g.param(b));
  }
};

template <typename T>
struct EmbeddingT {
  ParamT<T>* table = nullptr;

  EmbeddingT() = default;
  EmbeddingT(ParamStoreT<T>& ps, const std::string& name, int vocab, int dim,
             Rng& rng) {
    table = ps.create(name + ".table", {vocab, dim}, dim, rng);
  }

  Var operator()(GraphT<T>& g, const std::vector<int>& ids) const {
    return g.embedding(table, ids);
  }
};

// Gated recurrent unit cell, gates fused into two (in,3h)/(h,3h) matmuls.
// Gate order along the fused axis: reset, update, candidate.
// h' = update * h + (1-update) * candidate.
template <typename T>
struct GruCellT {
  ParamT<T>* wx = nullptr;
  ParamT<T>* wh = nullptr;
  ParamT<T>* bx = nullptr;
  ParamT<T>* bh = nullptr;
  int hidden = 0;

  GruCellT() = default;
  GruCellT(ParamStoreT<T>& ps, const std::string& name, int in, int h,
           Rng& rng)
      : hidden(h) {
    wx = ps.create(name + ".wx", {in, 3 * h}, in, rng);
    wh = ps.create(name + ".wh", {h, 3 * h}, h, rng);
    bx = ps.create(name + ".bx", {1, 3 * h}, 0, rng);
    bh = ps.create(name + ".bh", {1, 3 * h}, 0, rng);
  }

  Var step(GraphT<T>& g, Var x, Var h_prev) const {
    const int h = hidden;
    Var xg = g.add_bias(g.matmul(x, g.param(wx)), g.param(bx));
    Var hg = g.add_bias(g.matmul(h_prev, g.param(wh)), g.param(bh));
    Var reset = g.sigmoid(g.add(g.slice_cols(xg, 0, h), g.slice_cols(hg, 0, h)));
    Var update =
        g.sigmoid(g.add(g.slice_cols(xg, h, 2 * h), g.slice_cols(hg, h, 2 * h)));
    Var cand = g.tanh(g.add(g.slice_cols(xg, 2 * h, 3 * h),
                            g.mul(reset, g.slice_cols(hg, 2 * h, 3 * h))));
    return g.add(g.mul(update, h_prev),
                 g.mul(g.affine(update, T(-1), T(1)), cand));
  }
};

struct BiGruOut {
  std::vector<Var> states;  // per step, forward and backward concatenated
  Var final_forward;
  Var final_backward;
};

// Bidirectional GRU over a step list of (batch, in) vars. An optional step
// mask (batch, 1; 1 = real, 0 = pad) carries hidden state through padded
// steps so final states match each sample's true length.
template <typename T>
struct BiGruT {
  GruCellT<T> fwd;
  GruCellT<T> bwd;
  int hidden = 0;

  BiGruT() = default;
  BiGruT(ParamStoreT<T>& ps, const std::string& name, int in, int h, Rng& rng)
      : fwd(ps, name + ".fwd", in, h, rng),
        bwd(ps, name + ".bwd", in, h, rng),
        hidden(h) {}

  BiGruOut run(GraphT<T>& g, const std::vector<Var>& steps,
               const std::vector<Var>* mask) const {
    if (steps.empty()) throw DataError("bigru: empty sequence");
    const int batch = g.value(steps[0]).rows();
    const int n = static_cast<int>(steps.size());
    auto zero = [&]() {
      return g.input(TensorT<T>::zeros({batch, hidden}));
    };
    auto advance = [&](const GruCellT<T>& cell, Var x, Var h_prev, int t) {
      Var h_new = cell.step(g, x, h_prev);
      if (!mask) return h_new;
      Var m = (*mask)[t];
      return g.add(g.mul_colvec(h_new, m),
                   g.mul_colvec(h_prev, g.affine(m, T(-1), T(1))));
    };
    std::vector<Var> f(n), b(n);
    Var h = zero();
    for (int t = 0; t < n; ++t) {
      h = advance(fwd, steps[t], h, t);
      f[t] = h;
    }
    Var final_fwd = h;
    h = zero();
    for (int t = n - 1; t >= 0; --t) {
      h = advance(bwd, steps[t], h, t);
      b[t] = h;
    }
    Var final_bwd = h;
    BiGruOut out;
    out.states.reserve(n);
    for (int t = 0; t < n; ++t) out.states.push_back(g.concat_cols({f[t], b[t]}));
    out.final_forward = final_fwd;
    out.final_backward = final_bwd;
    return out;
  }
};

// Scaled dot-product attention over a list of key/value steps, batched by
// rows. `mask` (one (batch,1) var per step; 1 = attendable) must leave at
// least one step open per sample.
template <typename T>
struct StepAttention {
  static Var context(GraphT<T>& g, Var query, const std::vector<Var>& keys,
                     const std::vector<Var>& values,
                     const std::vector<Var>* mask) {
    if (keys.empty() || keys.size() != values.size()) {
      throw DataError("attention: keys/values must be non-empty, same length");
    }
    const int dim = g.value(keys[0]).cols();
    if (mask) {
      const int batch = g.value(query).rows();
      for (int r = 0; r < batch; ++r) {
        bool any = false;
        for (Var m : *mask) {
          if (g.value(m).data[r] > T(0.5)) {
            any = true;
            break;
          }
        }
        if (!any) throw DataError("attention: all steps masked for a sample");
      }
    }
    const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dim)));
    std::vector<Var> scores;
    scores.reserve(keys.size());
    for (size_t t = 0; t < keys.size(); ++t) {
      Var s = g.affine(g.rowwise_dot(query, keys[t]), scale, T(0));
      if (mask) {
        // Push masked steps to -1e9 before the softmax.
        Var penalty = g.affine((*mask)[t], T(1e9), T(-1e9));
        s = g.add(s, penalty);
      }
      scores.push_back(s);
    }
    Var weights = g.softmax_rows(g.concat_cols(scores));
    Var ctx = g.mul_colvec(values[0], g.slice_cols(weights, 0, 1));
    for (size_t t = 1; t < values.size(); ++t) {
      ctx = g.add(ctx, g.mul_colvec(values[t], g.slice_cols(
                                                   weights, static_cast<int>(t),
                                                   static_cast<int>(t) + 1)));
    }
    return ctx;
  }
};

// Sinusoidal position encoding rows [0, max_len).
template <typename T>
TensorT<T> sinusoid_positions(int max_len, int dim) {
  TensorT<T> pe = TensorT<T>::zeros({max_len, dim});
  for (int pos = 0; pos < max_len; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      double angle = pos / std::pow(10000.0, static_cast<double>(i) / dim);
      pe.at(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < dim) pe.at(pos, i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return pe;
}

// Pad/causal attention masks for packed (batch*len, dim) sequences, built as
// additive penalty matrices (0 attendable, -1e9 blocked).
template <typename T>
TensorT<T> attention_penalty(const std::vector<int>& q_lens, int q_max,
                             const std::vector<int>& k_lens, int k_max,
                             bool causal) {
  const int b = static_cast<int>(q_lens.size());
  TensorT<T> m = TensorT<T>::zeros({b * q_max, k_max});
  for (int s = 0; s < b; ++s) {
    for (int i = 0; i < q_max; ++i) {
      for (int j = 0; j < k_max; ++j) {
        bool blocked = j >= k_lens[s] || (causal && j > i);
        if (blocked) m.at(s * q_max + i, j) = static_cast<T>(-1e9);
      }
    }
  }
  return m;
}

// One post-norm transformer block: multi-head self-attention and a two-layer
// feed-forward, each wrapped with residual + layer norm. Operates on packed
// (batch*len, dim) inputs; `penalty` is the additive attention mask.
template <typename T>
struct TransformerBlockT {
  LinearT<T> wq, wk, wv, wo;
  LinearT<T> ff1, ff2;
  ParamT<T>* ln1_g = nullptr;
  ParamT<T>* ln1_b = nullptr;
  ParamT<T>* ln2_g = nullptr;
  ParamT<T>* ln2_b = nullptr;
  // Cross-attention (decoder blocks only).
  LinearT<T> cq, ck, cv, co;
  ParamT<T>* ln3_g = nullptr;
  ParamT<T>* ln3_b = nullptr;
  bool has_cross = false;
  int dim = 0;
  int heads = 0;
  double dropout = 0.0;

  TransformerBlockT() = default;
  TransformerBlockT(ParamStoreT<T>& ps, const std::string& name, int d,
                    int n_heads, int ffn, bool cross, double drop, Rng& rng)
      : has_cross(cross), dim(d), heads(n_heads), dropout(drop) {
    if (d % n_heads != 0) {
      throw ShapeError("model width " + std::to_string(d) +
                       " not divisible by head count " + std::to_string(n_heads));
    }
    wq = LinearT<T>(ps, name + ".self.q", d, d, rng);
    wk = LinearT<T>(ps, name + ".self.k", d, d, rng);
    wv = LinearT<T>(ps, name + ".self.v", d, d, rng);
    wo = LinearT<T>(ps, name + ".self.o", d, d, rng);
    ln1_g = ps.create_const(name + ".ln1.g", {1, d}, T(1));
    ln1_b = ps.create_const(name + ".ln1.b", {1, d}, T(0));
    if (cross) {
      cq = LinearT<T>(ps, name + ".cross.q", d, d, rng);
      ck = LinearT<T>(ps, name + ".cross.k", d, d, rng);
      cv = LinearT<T>(ps, name + ".cross.v", d, d, rng);
      co = LinearT<T>(ps, name + ".cross.o", d, d, rng);
      ln3_g = ps.create_const(name + ".ln3.g", {1, d}, T(1));
      ln3_b = ps.create_const(name + ".ln3.b", {1, d}, T(0));
    }
    ff1 = LinearT<T>(ps, name + ".ff1", d, ffn, rng);
    ff2 = LinearT<T>(ps, name + ".ff2", ffn, d, rng);
    ln2_g = ps.create_const(name + ".ln2.g", {1, d}, T(1));
    ln2_b = ps.create_const(name + ".ln2.b", {1, d}, T(0));
  }

  Var attend(GraphT<T>& g, const LinearT<T>& pq, const LinearT<T>& pk,
             const LinearT<T>& pv, const LinearT<T>& po, Var x_q, Var x_kv,
             int batch, int q_len, int k_len, Var penalty) const {
    Var q = pq(g, x_q);
    Var k = pk(g, x_kv);
    Var v = pv(g, x_kv);
    const int dh = dim / heads;
    const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh)));
    std::vector<Var> sample_ctx;
    sample_ctx.reserve(batch);
    for (int s = 0; s < batch; ++s) {
      Var qs = g.slice_rows(q, s * q_len, (s + 1) * q_len);
      Var ks = g.slice_rows(k, s * k_len, (s + 1) * k_len);
      Var vs = g.slice_rows(v, s * k_len, (s + 1) * k_len);
      Var ps = g.slice_rows(penalty, s * q_len, (s + 1) * q_len);
      std::vector<Var> head_ctx;
      head_ctx.reserve(heads);
      for (int h = 0; h < heads; ++h) {
        Var qh = g.slice_cols(qs, h * dh, (h + 1) * dh);
        Var kh = g.slice_cols(ks, h * dh, (h + 1) * dh);
        Var vh = g.slice_cols(vs, h * dh, (h + 1) * dh);
        Var scores = g.add(g.affine(g.matmul_nt(qh, kh), scale, T(0)), ps);
        Var weights = g.softmax_rows(scores);
        head_ctx.push_back(g.matmul(weights, vh));
      }
      sample_ctx.push_back(g.concat_cols(head_ctx));
    }
    Var ctx = batch == 1 ? sample_ctx[0] : g.concat_rows(sample_ctx);
    return po(g, ctx);
  }

  // Self-attention only (encoder use).
  Var operator()(GraphT<T>& g, Var x, int batch, int len, Var penalty) const {
    Var a = attend(g, wq, wk, wv, wo, x, x, batch, len, len, penalty);
    a = g.dropout(a, dropout);
    Var h = g.layer_norm(g.add(x, a), g.param(ln1_g), g.param(ln1_b));
    Var f = ff2(g, g.relu(ff1(g, h)));
    f = g.dropout(f, dropout);
    return g.layer_norm(g.add(h, f), g.param(ln2_g), g.param(ln2_b));
  }

  // Decoder block: causal self-attention then cross-attention to memory.
  Var decode(GraphT<T>& g, Var x, int batch, int len, Var self_penalty,
             Var memory, int mem_len, Var cross_penalty) const {
    Var a = attend(g, wq, wk, wv, wo, x, x, batch, len, len, self_penalty);
    a = g.dropout(a, dropout);
    Var h = g.layer_norm(g.add(x, a), g.param(ln1_g), g.param(ln1_b));
    Var c = attend(g, cq, ck, cv, co, h, memory, batch, len, mem_len,
                   cross_penalty);
    c = g.dropout(c, dropout);
    h = g.layer_norm(g.add(h, c), g.param(ln3_g), g.param(ln3_b));
    Var f = ff2(g, g.relu(ff1(g, h)));
    f = g.dropout(f, dropout);
    return g.layer_norm(g.add(h, f), g.param(ln2_g), g.param(ln2_b));
  }
};

using Linear = LinearT<float>;
using Embedding = EmbeddingT<float>;
using GruCell = GruCellT<float>;
using BiGru = BiGruT<float>;
using TransformerBlock = TransformerBlockT<float>;

}  // namespace nn
}  // namespace g2p
