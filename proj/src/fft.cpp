#include "fastphase/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace fastphase {

namespace {

// FFTW's planner is not thread-safe; plans are created once per (shape, sign)
// under a lock and executed concurrently through the new-array interface.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const Shape& shape, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(shape.dims(), sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<int> n(shape.dims().begin(), shape.dims().end());
    auto* buf = fftw_alloc_complex(shape.size());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw NumericError("FFTW failed to create a plan for shape " + shape.to_string());
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void scale(ComplexGrid& g, double s) {
  for (auto& v : g) v *= s;
}

}  // namespace

void fft_inplace(ComplexGrid& g, FftDirection dir) {
  const int sign = dir == FftDirection::kForward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_cache().get(g.shape(), sign);
  auto* p = reinterpret_cast<fftw_complex*>(g.data());
  fftw_execute_dft(plan, p, p);
}

ComplexGrid fft(const ComplexGrid& g) {
  ComplexGrid out = g;
  fft_inplace(out, FftDirection::kForward);
  return out;
}

ComplexGrid ifft(const ComplexGrid& g) {
  ComplexGrid out = g;
  fft_inplace(out, FftDirection::kBackward);
  return out;
}

ComplexGrid dft_oversampled(const ComplexGrid& x, const Shape& m) {
  if (!m.dominates(x.shape()))
    throw DimensionError("oversampled shape " + m.to_string() + " smaller than object shape " +
                         x.shape().to_string());
  ComplexGrid X = zero_pad(x, m);
  fft_inplace(X, FftDirection::kForward);
  scale(X, 1.0 / std::sqrt(static_cast<double>(m.size())));
  return X;
}

ComplexGrid dft(const ComplexGrid& x) { return dft_oversampled(x, x.shape()); }

ComplexGrid idft(const ComplexGrid& X) {
  ComplexGrid x = X;
  fft_inplace(x, FftDirection::kBackward);
  scale(x, 1.0 / std::sqrt(static_cast<double>(X.shape().size())));
  return x;
}

ComplexGrid dft_adjoint(const ComplexGrid& X, const Shape& n) { return crop(idft(X), n); }

}  // namespace fastphase
