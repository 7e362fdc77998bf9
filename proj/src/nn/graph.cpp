#include "g2p/nn/graph.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace g2p {
namespace nn {

namespace {

template <typename T>
using EMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using EMap = Eigen::Map<EMat<T>>;
template <typename T>
using ECMap = Eigen::Map<const EMat<T>>;

template <typename T>
ECMap<T> mat(const TensorT<T>& t) {
  return ECMap<T>(t.data.data(), t.rows(), t.cols());
}

template <typename T>
EMap<T> mat(TensorT<T>& t) {
  return EMap<T>(t.data.data(), t.rows(), t.cols());
}

#define G2P_REQUIRE(cond, expr) \
  do {                             \
    if (!(cond)) throw ShapeError(expr); \
  } while (0)

}  // namespace

// ---------------------------------------------------------------- ParamStore

template <typename T>
ParamT<T>* ParamStoreT<T>::create(const std::string& name,
                                  std::vector<int> shape, int fan_in,
                                  Rng& rng) {
  if (find(name)) throw DataError("duplicate parameter name: " + name);
  auto p = std::make_unique<ParamT<T>>();
  p->name = name;
  p->value = TensorT<T>::zeros(shape);
  p->grad = TensorT<T>::zeros(shape);
  if (fan_in > 0) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (T& v : p->value.data) {
      v = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
  params_.push_back(std::move(p));
  return params_.back().get();
}

template <typename T>
ParamT<T>* ParamStoreT<T>::create_const(const std::string& name,
                                        std::vector<int> shape, T value) {
  if (find(name)) throw DataError("duplicate parameter name: " + name);
  auto p = std::make_unique<ParamT<T>>();
  p->name = name;
  p->value = TensorT<T>::full(shape, value);
  p->grad = TensorT<T>::zeros(shape);
  params_.push_back(std::move(p));
  return params_.back().get();
}

template <typename T>
ParamT<T>* ParamStoreT<T>::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const ParamT<T>* ParamStoreT<T>::find(const std::string& name) const {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
ParamT<T>& ParamStoreT<T>::at(const std::string& name) {
  ParamT<T>* p = find(name);
  if (!p) throw DataError("no such parameter: " + name);
  return *p;
}

template <typename T>
void ParamStoreT<T>::zero_grads() {
  for (auto& p : params_) {
    std::fill(p->grad.data.begin(), p->grad.data.end(), T(0));
  }
}

template <typename T>
int64_t ParamStoreT<T>::total_elements() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
std::vector<ParamT<T>*> ParamStoreT<T>::params() {
  std::vector<ParamT<T>*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::vector<const ParamT<T>*> ParamStoreT<T>::params() const {
  std::vector<const ParamT<T>*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

// --------------------------------------------------------------------- Graph

template <typename T>
void GraphT<T>::check(const TensorT<T>& t, const char* op) const {
  if (!check_finite_) return;
  for (T v : t.data) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw DataError(std::string("non-finite value produced by op '") + op +
                      "'");
    }
  }
}

template <typename T>
Var GraphT<T>::emplace(TensorT<T> value, bool needs_grad,
                       std::function<void(GraphT&, Var)> bw, const char* op) {
  check(value, op);
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backward = std::move(bw);
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size()) - 1;
}

template <typename T>
Var GraphT<T>::input(TensorT<T> value) {
  return emplace(std::move(value), false, nullptr, "input");
}

template <typename T>
Var GraphT<T>::param(ParamT<T>* p) {
  Var v = emplace(p->value, true, nullptr, "param");
  nodes_[v].param = p;
  return v;
}

template <typename T>
const TensorT<T>& GraphT<T>::value(Var v) const {
  return nodes_[v].value;
}

template <typename T>
const TensorT<T>& GraphT<T>::grad(Var v) const {
  return nodes_[v].grad;
}

template <typename T>
TensorT<T>& GraphT<T>::grad_buf(Var v) {
  Node& n = nodes_[v];
  if (n.grad.data.empty()) n.grad = TensorT<T>::zeros(n.value.shape);
  return n.grad;
}

template <typename T>
void GraphT<T>::add_grad(Var v, const TensorT<T>& g) {
  TensorT<T>& buf = grad_buf(v);
  for (size_t i = 0; i < buf.data.size(); ++i) buf.data[i] += g.data[i];
}

template <typename T>
void GraphT<T>::backward(Var root) {
  G2P_REQUIRE(nodes_[root].value.size() == 1, "backward root must be a scalar");
  grad_buf(root).data[0] = T(1);
  for (Var v = root; v >= 0; --v) {
    Node& n = nodes_[v];
    if (n.grad.data.empty()) continue;  // did not influence the root
    if (n.backward) n.backward(*this, v);
    if (n.param) {
      for (size_t i = 0; i < n.grad.data.size(); ++i) {
        n.param->grad.data[i] += n.grad.data[i];
      }
    }
  }
}

template <typename T>
Var GraphT<T>::matmul(Var a, Var b) {
  const TensorT<T>& A = nodes_[a].value;
  const TensorT<T>& B = nodes_[b].value;
  G2P_REQUIRE(A.shape.size() == 2 && B.shape.size() == 2 && A.cols() == B.rows(),
          "matmul shape mismatch: " + shape_str(A.shape) + " x " +
              shape_str(B.shape));
  TensorT<T> out = TensorT<T>::zeros({A.rows(), B.cols()});
  mat(out).noalias() = mat(A) * mat(B);
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [a, b](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        if (g.nodes_[a].needs_grad) {
          mat(g.grad_buf(a)).noalias() += mat(G) * mat(g.nodes_[b].value).transpose();
        }
        if (g.nodes_[b].needs_grad) {
          mat(g.grad_buf(b)).noalias() += mat(g.nodes_[a].value).transpose() * mat(G);
        }
      } : std::function<void(GraphT&, Var)>(),
      "matmul");
}

template <typename T>
Var GraphT<T>::matmul_nt(Var a, Var b) {
  const TensorT<T>& A = nodes_[a].value;
  const TensorT<T>& B = nodes_[b].value;
  G2P_REQUIRE(A.shape.size() == 2 && B.shape.size() == 2 && A.cols() == B.cols(),
          "matmul_nt shape mismatch: " + shape_str(A.shape) + " x " +
              shape_str(B.shape) + "^T");
  TensorT<T> out = TensorT<T>::zeros({A.rows(), B.rows()});
  mat(out).noalias() = mat(A) * mat(B).transpose();
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [a, b](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        if (g.nodes_[a].needs_grad) {
          mat(g.grad_buf(a)).noalias() += mat(G) * mat(g.nodes_[b].value);
        }
        if (g.nodes_[b].needs_grad) {
          mat(g.grad_buf(b)).noalias() += mat(G).transpose() * mat(g.nodes_[a].value);
        }
      } : std::function<void(GraphT&, Var)>(),
      "matmul_nt");
}

template <typename T>
Var GraphT<T>::add(Var a, Var b) {
  const TensorT<T>& A = nodes_[a].value;
  const TensorT<T>& B = nodes_[b].value;
  G2P_REQUIRE(A.shape == B.shape, "add shape mismatch: " + shape_str(A.shape) +
                                  " vs " + shape_str(B.shape));
  TensorT<T> out = A;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [a, b](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        if (g.nodes_[a].needs_grad) g.add_grad(a, G);
        if (g.nodes_[b].needs_grad) g.add_grad(b, G);
      } : std::function<void(GraphT&, Var)>(),
      "add");
}

template <typename T>
Var GraphT<T>::add_bias(Var x, Var bias) {
  const TensorT<T>& X = nodes_[x].value;
  const TensorT<T>& B = nodes_[bias].value;
  G2P_REQUIRE(B.shape.size() == 2 && B.rows() == 1 && B.cols() == X.cols(),
          "add_bias shape mismatch: " + shape_str(X.shape) + " + " +
              shape_str(B.shape));
  TensorT<T> out = X;
  const int rows = X.rows(), cols = X.cols();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at(r, c) += B.data[c];
  }
  bool ng = nodes_[x].needs_grad || nodes_[bias].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, bias](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        if (g.nodes_[x].needs_grad) g.add_grad(x, G);
        if (g.nodes_[bias].needs_grad) {
          TensorT<T>& gb = g.grad_buf(bias);
          const int rows = G.rows(), cols = G.cols();
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) gb.data[c] += G.at(r, c);
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "add_bias");
}

template <typename T>
Var GraphT<T>::mul(Var a, Var b) {
  const TensorT<T>& A = nodes_[a].value;
  const TensorT<T>& B = nodes_[b].value;
  G2P_REQUIRE(A.shape == B.shape, "mul shape mismatch: " + shape_str(A.shape) +
                                  " vs " + shape_str(B.shape));
  TensorT<T> out = A;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [a, b](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        if (g.nodes_[a].needs_grad) {
          TensorT<T>& ga = g.grad_buf(a);
          const auto& bv = g.nodes_[b].value.data;
          for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += G.data[i] * bv[i];
        }
        if (g.nodes_[b].needs_grad) {
          TensorT<T>& gb = g.grad_buf(b);
          const auto& av = g.nodes_[a].value.data;
          for (size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += G.data[i] * av[i];
        }
      } : std::function<void(GraphT&, Var)>(),
      "mul");
}

template <typename T>
Var GraphT<T>::mul_colvec(Var x, Var col) {
  const TensorT<T>& X = nodes_[x].value;
  const TensorT<T>& C = nodes_[col].value;
  G2P_REQUIRE(C.shape.size() == 2 && C.cols() == 1 && C.rows() == X.rows(),
          "mul_colvec shape mismatch: " + shape_str(X.shape) + " * " +
              shape_str(C.shape));
  TensorT<T> out = X;
  const int rows = X.rows(), cols = X.cols();
  for (int r = 0; r < rows; ++r) {
    const T s = C.data[r];
    for (int c = 0; c < cols; ++c) out.at(r, c) *= s;
  }
  bool ng = nodes_[x].needs_grad || nodes_[col].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, col](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& X = g.nodes_[x].value;
        const TensorT<T>& C = g.nodes_[col].value;
        const int rows = G.rows(), cols = G.cols();
        if (g.nodes_[x].needs_grad) {
          TensorT<T>& gx = g.grad_buf(x);
          for (int r = 0; r < rows; ++r) {
            const T s = C.data[r];
            for (int c = 0; c < cols; ++c) gx.at(r, c) += G.at(r, c) * s;
          }
        }
        if (g.nodes_[col].needs_grad) {
          TensorT<T>& gc = g.grad_buf(col);
          for (int r = 0; r < rows; ++r) {
            T acc = 0;
            for (int c = 0; c < cols; ++c) acc += G.at(r, c) * X.at(r, c);
            gc.data[r] += acc;
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "mul_colvec");
}

template <typename T>
Var GraphT<T>::rowwise_dot(Var a, Var b) {
  const TensorT<T>& A = nodes_[a].value;
  const TensorT<T>& B = nodes_[b].value;
  G2P_REQUIRE(A.shape == B.shape && A.shape.size() == 2,
          "rowwise_dot shape mismatch: " + shape_str(A.shape) + " vs " +
              shape_str(B.shape));
  const int rows = A.rows(), cols = A.cols();
  TensorT<T> out = TensorT<T>::zeros({rows, 1});
  for (int r = 0; r < rows; ++r) {
    T acc = 0;
    for (int c = 0; c < cols; ++c) acc += A.at(r, c) * B.at(r, c);
    out.data[r] = acc;
  }
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [a, b](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& A = g.nodes_[a].value;
        const TensorT<T>& B = g.nodes_[b].value;
        const int rows = A.rows(), cols = A.cols();
        if (g.nodes_[a].needs_grad) {
          TensorT<T>& ga = g.grad_buf(a);
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) ga.at(r, c) += G.data[r] * B.at(r, c);
          }
        }
        if (g.nodes_[b].needs_grad) {
          TensorT<T>& gb = g.grad_buf(b);
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) gb.at(r, c) += G.data[r] * A.at(r, c);
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "rowwise_dot");
}

template <typename T>
Var GraphT<T>::affine(Var x, T m, T a) {
  TensorT<T> out = nodes_[x].value;
  for (T& v : out.data) v = m * v + a;
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, m](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        TensorT<T>& gx = g.grad_buf(x);
        for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += m * G.data[i];
      } : std::function<void(GraphT&, Var)>(),
      "affine");
}

template <typename T>
Var GraphT<T>::sigmoid(Var x) {
  TensorT<T> out = nodes_[x].value;
  for (T& v : out.data) {
    if (v >= 0) {
      v = T(1) / (T(1) + std::exp(-v));
    } else {
      T e = std::exp(v);
      v = e / (T(1) + e);
    }
  }
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& Y = g.nodes_[self].value;
        TensorT<T>& gx = g.grad_buf(x);
        for (size_t i = 0; i < gx.data.size(); ++i) {
          gx.data[i] += G.data[i] * Y.data[i] * (T(1) - Y.data[i]);
        }
      } : std::function<void(GraphT&, Var)>(),
      "sigmoid");
}

template <typename T>
Var GraphT<T>::tanh(Var x) {
  TensorT<T> out = nodes_[x].value;
  for (T& v : out.data) v = std::tanh(v);
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& Y = g.nodes_[self].value;
        TensorT<T>& gx = g.grad_buf(x);
        for (size_t i = 0; i < gx.data.size(); ++i) {
          gx.data[i] += G.data[i] * (T(1) - Y.data[i] * Y.data[i]);
        }
      } : std::function<void(GraphT&, Var)>(),
      "tanh");
}

template <typename T>
Var GraphT<T>::relu(Var x) {
  TensorT<T> out = nodes_[x].value;
  for (T& v : out.data) v = v > T(0) ? v : T(0);
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& X = g.nodes_[x].value;
        TensorT<T>& gx = g.grad_buf(x);
        for (size_t i = 0; i < gx.data.size(); ++i) {
          if (X.data[i] > T(0)) gx.data[i] += G.data[i];
        }
      } : std::function<void(GraphT&, Var)>(),
      "relu");
}

template <typename T>
Var GraphT<T>::softmax_rows(Var x) {
  TensorT<T> out = nodes_[x].value;
  const int rows = out.rows(), cols = out.cols();
  for (int r = 0; r < rows; ++r) {
    T m = out.at(r, 0);
    for (int c = 1; c < cols; ++c) m = std::max(m, out.at(r, c));
    T sum = 0;
    for (int c = 0; c < cols; ++c) {
      T e = std::exp(out.at(r, c) - m);
      out.at(r, c) = e;
      sum += e;
    }
    for (int c = 0; c < cols; ++c) out.at(r, c) /= sum;
  }
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& Y = g.nodes_[self].value;
        TensorT<T>& gx = g.grad_buf(x);
        const int rows = Y.rows(), cols = Y.cols();
        for (int r = 0; r < rows; ++r) {
          T dot = 0;
          for (int c = 0; c < cols; ++c) dot += G.at(r, c) * Y.at(r, c);
          for (int c = 0; c < cols; ++c) {
            gx.at(r, c) += (G.at(r, c) - dot) * Y.at(r, c);
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "softmax");
}

template <typename T>
Var GraphT<T>::sum_all(Var x) {
  T total = 0;
  for (T v : nodes_[x].value.data) total += v;
  TensorT<T> out({1, 1}, {total});
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x](GraphT& g, Var self) {
        const T gv = g.nodes_[self].grad.data[0];
        TensorT<T>& gx = g.grad_buf(x);
        for (T& v : gx.data) v += gv;
      } : std::function<void(GraphT&, Var)>(),
      "sum_all");
}

template <typename T>
Var GraphT<T>::concat_cols(const std::vector<Var>& xs) {
  G2P_REQUIRE(!xs.empty(), "concat_cols of nothing");
  const int rows = nodes_[xs[0]].value.rows();
  int cols = 0;
  bool ng = false;
  for (Var v : xs) {
    G2P_REQUIRE(nodes_[v].value.rows() == rows, "concat_cols row mismatch");
    cols += nodes_[v].value.cols();
    ng = ng || nodes_[v].needs_grad;
  }
  TensorT<T> out = TensorT<T>::zeros({rows, cols});
  int off = 0;
  for (Var v : xs) {
    const TensorT<T>& X = nodes_[v].value;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < X.cols(); ++c) out.at(r, off + c) = X.at(r, c);
    }
    off += X.cols();
  }
  std::vector<Var> inputs = xs;
  return emplace(
      std::move(out), ng,
      ng ? [inputs](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const int rows = G.rows();
        int off = 0;
        for (Var v : inputs) {
          const int c0 = g.nodes_[v].value.cols();
          if (g.nodes_[v].needs_grad) {
            TensorT<T>& gv = g.grad_buf(v);
            for (int r = 0; r < rows; ++r) {
              for (int c = 0; c < c0; ++c) gv.at(r, c) += G.at(r, off + c);
            }
          }
          off += c0;
        }
      } : std::function<void(GraphT&, Var)>(),
      "concat_cols");
}

template <typename T>
Var GraphT<T>::concat_rows(const std::vector<Var>& xs) {
  G2P_REQUIRE(!xs.empty(), "concat_rows of nothing");
  const int cols = nodes_[xs[0]].value.cols();
  int rows = 0;
  bool ng = false;
  for (Var v : xs) {
    G2P_REQUIRE(nodes_[v].value.cols() == cols, "concat_rows column mismatch");
    rows += nodes_[v].value.rows();
    ng = ng || nodes_[v].needs_grad;
  }
  TensorT<T> out = TensorT<T>::zeros({rows, cols});
  int off = 0;
  for (Var v : xs) {
    const TensorT<T>& X = nodes_[v].value;
    std::copy(X.data.begin(), X.data.end(), out.data.begin() +
                                                static_cast<size_t>(off) * cols);
    off += X.rows();
  }
  std::vector<Var> inputs = xs;
  return emplace(
      std::move(out), ng,
      ng ? [inputs, cols](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        int off = 0;
        for (Var v : inputs) {
          const int r0 = g.nodes_[v].value.rows();
          if (g.nodes_[v].needs_grad) {
            TensorT<T>& gv = g.grad_buf(v);
            for (int i = 0; i < r0 * cols; ++i) {
              gv.data[i] += G.data[static_cast<size_t>(off) * cols + i];
            }
          }
          off += r0;
        }
      } : std::function<void(GraphT&, Var)>(),
      "concat_rows");
}

template <typename T>
Var GraphT<T>::slice_cols(Var x, int from, int to) {
  const TensorT<T>& X = nodes_[x].value;
  G2P_REQUIRE(0 <= from && from < to && to <= X.cols(),
          "slice_cols out of range for " + shape_str(X.shape));
  const int rows = X.rows(), w = to - from;
  TensorT<T> out = TensorT<T>::zeros({rows, w});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < w; ++c) out.at(r, c) = X.at(r, from + c);
  }
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, from, w](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        TensorT<T>& gx = g.grad_buf(x);
        const int rows = G.rows();
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < w; ++c) gx.at(r, from + c) += G.at(r, c);
        }
      } : std::function<void(GraphT&, Var)>(),
      "slice_cols");
}

template <typename T>
Var GraphT<T>::slice_rows(Var x, int from, int to) {
  const TensorT<T>& X = nodes_[x].value;
  G2P_REQUIRE(0 <= from && from < to && to <= X.rows(),
          "slice_rows out of range for " + shape_str(X.shape));
  const int cols = X.cols(), h = to - from;
  TensorT<T> out = TensorT<T>::zeros({h, cols});
  std::copy(X.data.begin() + static_cast<size_t>(from) * cols,
            X.data.begin() + static_cast<size_t>(to) * cols, out.data.begin());
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, from, h, cols](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        TensorT<T>& gx = g.grad_buf(x);
        for (int i = 0; i < h * cols; ++i) {
          gx.data[static_cast<size_t>(from) * cols + i] += G.data[i];
        }
      } : std::function<void(GraphT&, Var)>(),
      "slice_rows");
}

template <typename T>
Var GraphT<T>::embedding(ParamT<T>* table, const std::vector<int>& ids) {
  const int vocab = table->value.rows();
  const int dim = table->value.cols();
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw DataError("embedding id " + std::to_string(id) +
                      " out of range for vocab " + std::to_string(vocab));
    }
  }
  TensorT<T> out = TensorT<T>::zeros({static_cast<int>(ids.size()), dim});
  for (size_t i = 0; i < ids.size(); ++i) {
    std::copy(table->value.data.begin() + static_cast<size_t>(ids[i]) * dim,
              table->value.data.begin() + static_cast<size_t>(ids[i] + 1) * dim,
              out.data.begin() + i * dim);
  }
  std::vector<int> ids_copy = ids;
  Var v = emplace(
      std::move(out), true,
      [table, ids_copy, dim](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        for (size_t i = 0; i < ids_copy.size(); ++i) {
          for (int c = 0; c < dim; ++c) {
            table->grad.data[static_cast<size_t>(ids_copy[i]) * dim + c] +=
                G.data[i * dim + c];
          }
        }
      },
      "embedding");
  return v;
}

template <typename T>
Var GraphT<T>::layer_norm(Var x, Var gain, Var bias) {
  const TensorT<T>& X = nodes_[x].value;
  const TensorT<T>& Gn = nodes_[gain].value;
  const TensorT<T>& Bs = nodes_[bias].value;
  const int rows = X.rows(), cols = X.cols();
  G2P_REQUIRE(Gn.rows() == 1 && Gn.cols() == cols && Bs.rows() == 1 &&
              Bs.cols() == cols,
          "layer_norm gain/bias must be (1," + std::to_string(cols) + ")");
  constexpr T kEps = static_cast<T>(1e-5);
  TensorT<T> out = TensorT<T>::zeros({rows, cols});
  TensorT<T> xhat = TensorT<T>::zeros({rows, cols});
  TensorT<T> inv_std = TensorT<T>::zeros({rows, 1});
  for (int r = 0; r < rows; ++r) {
    T mean = 0;
    for (int c = 0; c < cols; ++c) mean += X.at(r, c);
    mean /= cols;
    T var = 0;
    for (int c = 0; c < cols; ++c) {
      T d = X.at(r, c) - mean;
      var += d * d;
    }
    var /= cols;
    const T is = T(1) / std::sqrt(var + kEps);
    inv_std.data[r] = is;
    for (int c = 0; c < cols; ++c) {
      T xh = (X.at(r, c) - mean) * is;
      xhat.at(r, c) = xh;
      out.at(r, c) = xh * Gn.data[c] + Bs.data[c];
    }
  }
  bool ng = nodes_[x].needs_grad || nodes_[gain].needs_grad ||
            nodes_[bias].needs_grad;
  auto xhat_ptr = std::make_shared<TensorT<T>>(std::move(xhat));
  auto is_ptr = std::make_shared<TensorT<T>>(std::move(inv_std));
  return emplace(
      std::move(out), ng,
      ng ? [x, gain, bias, xhat_ptr, is_ptr](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        const TensorT<T>& Gn = g.nodes_[gain].value;
        const int rows = G.rows(), cols = G.cols();
        if (g.nodes_[gain].needs_grad) {
          TensorT<T>& gg = g.grad_buf(gain);
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
              gg.data[c] += G.at(r, c) * xhat_ptr->at(r, c);
            }
          }
        }
        if (g.nodes_[bias].needs_grad) {
          TensorT<T>& gb = g.grad_buf(bias);
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) gb.data[c] += G.at(r, c);
          }
        }
        if (g.nodes_[x].needs_grad) {
          TensorT<T>& gx = g.grad_buf(x);
          for (int r = 0; r < rows; ++r) {
            T sum_dy = 0, sum_dy_xh = 0;
            for (int c = 0; c < cols; ++c) {
              T dy = G.at(r, c) * Gn.data[c];
              sum_dy += dy;
              sum_dy_xh += dy * xhat_ptr->at(r, c);
            }
            const T inv_n = T(1) / cols;
            const T is = is_ptr->data[r];
            for (int c = 0; c < cols; ++c) {
              T dy = G.at(r, c) * Gn.data[c];
              gx.at(r, c) += is * (dy - inv_n * sum_dy -
                                   xhat_ptr->at(r, c) * inv_n * sum_dy_xh);
            }
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "layer_norm");
}

template <typename T>
Var GraphT<T>::cross_entropy(Var logits, const std::vector<int>& targets,
                             int ignore_id) {
  const TensorT<T>& L = nodes_[logits].value;
  const int rows = L.rows(), cols = L.cols();
  G2P_REQUIRE(static_cast<int>(targets.size()) == rows,
          "cross_entropy needs one target per row");
  int count = 0;
  for (int t : targets) {
    if (t == ignore_id) continue;
    if (t < 0 || t >= cols) {
      throw DataError("cross_entropy target " + std::to_string(t) +
                      " out of range for " + std::to_string(cols) + " classes");
    }
    ++count;
  }
  if (count == 0) throw DataError("cross_entropy: all targets are padding");

  // Cache the softmax for the backward pass.
  auto probs = std::make_shared<TensorT<T>>(TensorT<T>::zeros({rows, cols}));
  double loss = 0;
  for (int r = 0; r < rows; ++r) {
    T m = L.at(r, 0);
    for (int c = 1; c < cols; ++c) m = std::max(m, L.at(r, c));
    double sum = 0;
    for (int c = 0; c < cols; ++c) {
      double e = std::exp(static_cast<double>(L.at(r, c) - m));
      probs->at(r, c) = static_cast<T>(e);
      sum += e;
    }
    for (int c = 0; c < cols; ++c) {
      probs->at(r, c) = static_cast<T>(probs->at(r, c) / sum);
    }
    if (targets[r] != ignore_id) {
      double p = static_cast<double>(probs->at(r, targets[r]));
      loss -= std::log(std::max(p, 1e-30));
    }
  }
  TensorT<T> out({1, 1}, {static_cast<T>(loss / count)});
  std::vector<int> tgt = targets;
  bool ng = nodes_[logits].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [logits, tgt, ignore_id, probs, count](GraphT& g, Var self) {
        const T gscale = g.nodes_[self].grad.data[0] / static_cast<T>(count);
        TensorT<T>& gl = g.grad_buf(logits);
        const int rows = gl.rows(), cols = gl.cols();
        for (int r = 0; r < rows; ++r) {
          if (tgt[r] == ignore_id) continue;
          for (int c = 0; c < cols; ++c) {
            T delta = (c == tgt[r]) ? T(1) : T(0);
            gl.at(r, c) += gscale * (probs->at(r, c) - delta);
          }
        }
      } : std::function<void(GraphT&, Var)>(),
      "cross_entropy");
}

template <typename T>
Var GraphT<T>::dropout(Var x, double rate) {
  if (!train_mode_ || rate <= 0.0) return x;
  if (!rng_) throw DataError("dropout requires a graph rng in train mode");
  const TensorT<T>& X = nodes_[x].value;
  auto mask = std::make_shared<TensorT<T>>(TensorT<T>::zeros(X.shape));
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  TensorT<T> out = X;
  for (size_t i = 0; i < out.data.size(); ++i) {
    if (rng_->next_double() < rate) {
      out.data[i] = T(0);
    } else {
      mask->data[i] = keep_scale;
      out.data[i] *= keep_scale;
    }
  }
  bool ng = nodes_[x].needs_grad;
  return emplace(
      std::move(out), ng,
      ng ? [x, mask](GraphT& g, Var self) {
        const TensorT<T>& G = g.nodes_[self].grad;
        TensorT<T>& gx = g.grad_buf(x);
        for (size_t i = 0; i < gx.data.size(); ++i) {
          gx.data[i] += G.data[i] * mask->data[i];
        }
      } : std::function<void(GraphT&, Var)>(),
      "dropout");
}

template class ParamStoreT<float>;
template class ParamStoreT<double>;
template class GraphT<float>;
template class GraphT<double>;

}  // namespace nn
}  // namespace g2p
