#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fastphase/instance.hpp"
#include "fastphase/schwarz.hpp"
#include "fastphase/tensor.hpp"
#include "fastphase/trust_region.hpp"
#include "fastphase/winding.hpp"
#include "fastphase/wirtinger.hpp"

namespace fastphase {

struct FastPhaseOptions {
  SchwarzConfig schwarz;
  TrustRegionConfig trust_region;
  WindingMethod winding = WindingMethod::kMirroredBox;
  CostVariant cost = CostVariant::kNormalized;
  double lambda = 1.0;
  // Skip winding estimation and use this index.
  std::optional<MultiIndex> w;
  // Used only when the winding is ambiguous (self-reflected index or a tie
  // beyond the reflection pair): each candidate index also gets an
  // unperturbed least-squares start and this many perturbed starts, and if
  // none reaches the cost tolerance up to fallback_candidates further
  // indices are tried in score order, one per reflection class.
  int restarts = 4;
  double restart_scale = 0.3;
  int fallback_candidates = 8;
};

struct FastPhaseResult {
  ComplexGrid x;
  ComplexGrid x0;
  SolveReport report;
  MultiIndex w;
  std::optional<WindingResult> winding;
  int attempts = 1;
};

// True when the start built at w cannot tell x from its conjugate reflection
// or the winding score does not single out one reflection pair.
bool winding_is_ambiguous(const MultiIndex& w, const Shape& support, const WindingResult* winding);

FastPhaseResult fast_phase_retrieve(const RealGrid& y, const Shape& support, const FastPhaseOptions& opts = {});

enum class MaskAnchor {
  kBestCorner,  // support corner admitting the largest base r
  kArgmax,      // largest-magnitude entry
};

std::string to_string(MaskAnchor a);
MaskAnchor parse_mask_anchor(const std::string& s);

// Builds the decay mask for the given magnitudes under the anchor policy.
DecayMask select_decay_mask(const RealGrid& abs_x, double margin = 2.0,
                            MaskAnchor policy = MaskAnchor::kBestCorner);

struct MaskedMeasurement {
  RealGrid abs_x;  // first measurement, |x|
  RealGrid y2;     // |F(D x)|^2
  DecayMask mask;
};

// Simulates both measurements of the two-shot scheme for a known object.
MaskedMeasurement masked_measurements(const ComplexGrid& x, double margin = 2.0,
                                      MaskAnchor policy = MaskAnchor::kBestCorner);

struct MaskedResult {
  ComplexGrid x;  // masked-frame solution unmasked, moduli set to abs_x
  DecayMask mask;
  FastPhaseResult inner;
};

inline constexpr double kMaskUnderflow = 1e-300;

MaskedResult masked_fast_phase(const RealGrid& abs_x, const RealGrid& y2, double margin = 2.0,
                               const FastPhaseOptions& opts = {},
                               MaskAnchor policy = MaskAnchor::kBestCorner);

struct AlignmentResult {
  ComplexGrid aligned;
  MultiIndex shift;
  Complex phase{1.0, 0.0};
  bool flipped = false;
  double residual = 0;
};

// Conjugate reflection about the origin of the candidate's own grid:
// out[i] = conj(x[(-i) mod n]).
ComplexGrid conj_reflect(const ComplexGrid& x);
AlignmentResult align(const ComplexGrid& candidate, const ComplexGrid& truth);
double aligned_relative_error(const ComplexGrid& candidate, const ComplexGrid& truth);

inline constexpr double kRmseFloorDb = -300.0;
double rmse_db(const ComplexGrid& candidate, const ComplexGrid& truth);

}  // namespace fastphase
