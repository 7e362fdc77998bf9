#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace g2p {

// Deterministic random source. All draws go through explicit helpers rather
// than std <random> distributions, whose output is implementation-defined;
// the mt19937_64 stream itself is pinned by the standard, so a given seed
// reproduces bit-identically everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix(seed, 0)), seed_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  float next_float() { return static_cast<float>(next_double()); }

  // Uniform integer in [0, n). Lemire's multiply-shift, debiased.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    while (true) {
      uint64_t x = gen_();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      uint64_t l = static_cast<uint64_t>(m);
      if (l >= n || l >= (-n) % n) return static_cast<uint64_t>(m >> 64);
    }
  }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Derives an independent stream, e.g. one per parameter tensor.
  Rng child(uint64_t stream) const { return Rng(mix(seed_, stream + 1)); }

  uint64_t seed() const { return seed_; }

  // Fisher-Yates with explicit bounded draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  static uint64_t mix(uint64_t a, uint64_t b) {
    // splitmix64 finalizer over the pair.
    uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_;
};

}  // namespace g2p
