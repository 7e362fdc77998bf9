#pragma once

#include <cmath>
#include <vector>

#include "g2p/nn/graph.hpp"

namespace g2p {
namespace nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient-norm clip; <= 0 disables
};

// Adaptive-moment optimizer with bias correction. State is keyed by the
// store's registration order, so step sequences are reproducible.
template <typename T>
class AdamT {
 public:
  AdamT(ParamStoreT<T>& store, AdamConfig cfg) : store_(&store), cfg_(cfg) {
    for (auto* p : store.params()) {
      m_.push_back(TensorT<T>::zeros(p->value.shape));
      v_.push_back(TensorT<T>::zeros(p->value.shape));
    }
  }

  void step() {
    ++t_;
    auto params = store_->params();
    double scale = 1.0;
    if (cfg_.clip > 0) {
      double norm_sq = 0;
      for (auto* p : params) {
        for (T gv : p->grad.data) {
          norm_sq += static_cast<double>(gv) * static_cast<double>(gv);
        }
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > cfg_.clip) scale = cfg_.clip / norm;
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      ParamT<T>* p = params[i];
      for (size_t k = 0; k < p->value.data.size(); ++k) {
        const double g = static_cast<double>(p->grad.data[k]) * scale;
        double m = cfg_.beta1 * m_[i].data[k] + (1 - cfg_.beta1) * g;
        double v = cfg_.beta2 * v_[i].data[k] + (1 - cfg_.beta2) * g * g;
        m_[i].data[k] = static_cast<T>(m);
        v_[i].data[k] = static_cast<T>(v);
        const double update =
            cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
        p->value.data[k] -= static_cast<T>(update);
      }
    }
  }

  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

  int64_t steps_taken() const { return t_; }

 private:
  ParamStoreT<T>* store_;
  AdamConfig cfg_;
  std::vector<TensorT<T>> m_;
  std::vector<TensorT<T>> v_;
  int64_t t_ = 0;
};

using Adam = AdamT<float>;

}  // namespace nn
}  // namespace g2p
