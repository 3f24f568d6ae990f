#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <unistd.h>

#include "fastphase/rng.hpp"
#include "fastphase/tensor.hpp"

namespace fastphase::testing {

// Direct O(N·M) evaluation of the unitary oversampled DFT.
inline ComplexGrid direct_dft(const ComplexGrid& x, const Shape& m) {
  ComplexGrid X(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m.size()));
  for_each_index(m, [&](const MultiIndex& k, std::size_t kf) {
    Complex acc = 0;
    for_each_index(x.shape(), [&](const MultiIndex& i, std::size_t xf) {
      double phase = 0;
      for (std::size_t a = 0; a < m.rank(); ++a)
        phase += static_cast<double>(k[a] * i[a]) / static_cast<double>(m[a]);
      acc += x[xf] * std::polar(1.0, -2.0 * std::numbers::pi * phase);
    });
    X[kf] = scale * acc;
  });
  return X;
}

inline double max_abs_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

inline double max_abs_diff(const RealGrid& a, const RealGrid& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

inline double relative_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline ComplexGrid random_grid(const Shape& s, std::uint64_t seed) {
  Rng rng(seed);
  return complex_gaussian(s, rng);
}

// Fresh scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fastphase_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fastphase::testing
