#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2p/errors.hpp"

namespace g2p {
namespace nn {

// Dense row-major array. Training runs in float; gradient checking
// instantiates the same code in double.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;
  TensorT(std::vector<int> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (numel(shape) != static_cast<int64_t>(data.size())) {
      throw ShapeError("tensor data length does not match shape");
    }
  }

  static int64_t numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

  static TensorT zeros(std::vector<int> shape) {
    TensorT t;
    t.data.assign(static_cast<size_t>(numel(shape)), T(0));
    t.shape = std::move(shape);
    return t;
  }

  static TensorT full(std::vector<int> shape, T v) {
    TensorT t;
    t.data.assign(static_cast<size_t>(numel(shape)), v);
    t.shape = std::move(shape);
    return t;
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int cols() const { return shape.empty() ? 0 : shape.back(); }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (T v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }
};

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

using Tensor = TensorT<float>;

}  // namespace nn
}  // namespace g2p
