#pragma once

#include <cstddef>
#include <vector>

#include "fastphase/tensor.hpp"

namespace fastphase {

enum class WindingMethod {
  // Union of the two mirrored lag boxes with the mean off-origin
  // autocorrelation level removed. Default.
  kMirroredBox,
  // Single lag box, box-convolution argmax exactly as in the textbook algorithm.
  kBoxConvolution,
};

struct WindingResult {
  MultiIndex w;
  RealGrid score_grid;               // score over the support box; w is its argmax
  bool tie = false;                  // max attained at more than one index (1e-9 relative)
  std::vector<MultiIndex> tied;      // all indices attaining the max, row-major order
  double imag_residue = 0;           // max |Im| / max |Re| of the box convolution
};

WindingResult winding_from_measurement(const RealGrid& y, const Shape& support,
                                       WindingMethod method = WindingMethod::kMirroredBox);

// Index of the conjugate-reflected object's dominant entry: n - 1 - w.
MultiIndex reflected_index(const MultiIndex& w, const Shape& support);
// True when a and b agree up to conjugate reflection.
bool same_up_to_reflection(const MultiIndex& a, const MultiIndex& b, const Shape& support);
// True when a tied set is no larger than {w, n-1-w}.
bool tie_is_reflection_pair(const WindingResult& r, const Shape& support);

// Winding number of X(z) = sum_i x_i z^i along one axis, other variables at 1.
// samples = 0 selects 32 * n_axis points (16 per oversampled frequency).
int winding_of_object(const ComplexGrid& x, std::size_t axis, std::size_t samples = 0);
MultiIndex winding_of_object(const ComplexGrid& x);

}  // namespace fastphase
