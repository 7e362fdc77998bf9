#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "g2p/nn/tensor.hpp"
#include "g2p/rng.hpp"

namespace g2p {
namespace nn {

// Handle to a node inside a GraphT; only meaningful for the graph that
// produced it.
using Var = int;

template <typename T>
struct ParamT {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;  // accumulated by GraphT::backward
};

// Ordered, name-unique parameter set for one model. Iteration order is the
// registration order, which fixes initialization and checkpoint layout.
template <typename T>
class ParamStoreT {
 public:
  // Uniform init scaled by fan-in; fan_in == 0 means zero init (biases).
  ParamT<T>* create(const std::string& name, std::vector<int> shape,
                    int fan_in, Rng& rng);
  ParamT<T>* create_const(const std::string& name, std::vector<int> shape,
                          T value);

  ParamT<T>* find(const std::string& name);
  const ParamT<T>* find(const std::string& name) const;
  ParamT<T>& at(const std::string& name);

  void zero_grads();
  int64_t total_elements() const;

  std::vector<ParamT<T>*> params();
  std::vector<const ParamT<T>*> params() const;

  template <typename U>
  ParamStoreT<U> cast() const {
    ParamStoreT<U> out;
    for (const auto& p : params_) {
      auto* q = out.create_const(p->name, p->value.shape, U(0));
      q->value = p->value.template cast<U>();
    }
    return out;
  }

 private:
  std::vector<std::unique_ptr<ParamT<T>>> params_;
};

// Reverse-mode tape. Ops execute eagerly; backward() replays the recorded
// closures in reverse order. Single-threaded by design.
template <typename T>
class GraphT {
 public:
  explicit GraphT(bool train_mode = false, Rng* rng = nullptr,
                  bool check_finite = true)
      : train_mode_(train_mode), rng_(rng), check_finite_(check_finite) {}

  bool train_mode() const { return train_mode_; }

  Var input(TensorT<T> value);                 // constant, no gradient
  Var param(ParamT<T>* p);                     // leaf backed by a parameter
  const TensorT<T>& value(Var v) const;
  const TensorT<T>& grad(Var v) const;

  // Seeds d(root)/d(root) = 1 (root must be 1x1) and sweeps the tape in
  // reverse, accumulating parameter gradients into their stores.
  void backward(Var root);

  // --- forward ops -------------------------------------------------------
  Var matmul(Var a, Var b);      // (m,k)x(k,n)
  Var matmul_nt(Var a, Var b);   // a * b^T
  Var add(Var a, Var b);         // same shape
  Var add_bias(Var x, Var bias); // bias is (1,c), broadcast over rows
  Var mul(Var a, Var b);         // elementwise
  Var mul_colvec(Var x, Var col);  // col is (r,1), broadcast over columns
  Var rowwise_dot(Var a, Var b);   // (r,c)·(r,c) -> (r,1)
  Var affine(Var x, T mul, T add); // mul*x + add, elementwise
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var relu(Var x);
  Var softmax_rows(Var x);
  Var sum_all(Var x);  // scalar (1,1) sum of all elements
  Var concat_cols(const std::vector<Var>& xs);
  Var concat_rows(const std::vector<Var>& xs);
  Var slice_cols(Var x, int from, int to);
  Var slice_rows(Var x, int from, int to);
  Var embedding(ParamT<T>* table, const std::vector<int>& ids);
  Var layer_norm(Var x, Var gain, Var bias);  // per-row, gain/bias (1,c)
  // Mean negative log-softmax over rows whose target != ignore_id.
  Var cross_entropy(Var logits, const std::vector<int>& targets, int ignore_id);
  // Identity in eval mode; in train mode zeroes entries with prob `rate` and
  // rescales the rest by 1/(1-rate). Requires the graph rng.
  Var dropout(Var x, double rate);

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    TensorT<T> value;
    TensorT<T> grad;
    bool needs_grad = false;
    ParamT<T>* param = nullptr;
    std::function<void(GraphT&, Var)> backward;
  };

  Var emplace(TensorT<T> value, bool needs_grad,
              std::function<void(GraphT&, Var)> bw, const char* op);
  TensorT<T>& grad_buf(Var v);
  void add_grad(Var v, const TensorT<T>& g);
  void check(const TensorT<T>& t, const char* op) const;

  std::vector<Node> nodes_;
  bool train_mode_;
  Rng* rng_;
  bool check_finite_;
};

using Graph = GraphT<float>;
using Param = ParamT<float>;
using ParamStore = ParamStoreT<float>;

}  // namespace nn
}  // namespace g2p
