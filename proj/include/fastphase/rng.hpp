#pragma once

#include <cstdint>
#include <random>

#include "fastphase/tensor.hpp"

namespace fastphase {

// Seeded source used everywhere randomness is needed. mt19937_64 and the
// libstdc++ normal distribution are deterministic for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  // Standard complex normal: E|z|^2 = 1.
  Complex complex_normal() {
    constexpr double s = 0.70710678118654752440;
    double re = normal();
    double im = normal();
    return {s * re, s * im};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

ComplexGrid complex_gaussian(const Shape& shape, Rng& rng);
MultiIndex uniform_index(const Shape& shape, Rng& rng);

}  // namespace fastphase
