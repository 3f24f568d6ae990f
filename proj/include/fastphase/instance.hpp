#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fastphase/tensor.hpp"

namespace fastphase {

struct SchwarzSpec {
  Shape support;
  MultiIndex w;
  double dominance_ratio = 2.0;
  std::uint64_t seed = 0;
};

struct DecayMask {
  double r = 1.0;
  MultiIndex anchor;
  RealGrid values;  // r^{|k - anchor|_1} over the support
};

struct Instance {
  RealGrid y;
  Shape support;
  std::optional<ComplexGrid> truth;
  std::optional<double> noise_sigma;
  // Provenance, written to meta.json.
  std::uint64_t seed = 0;
  std::optional<double> snr_db;
  std::optional<double> rho;
  std::optional<MultiIndex> w;
};

// Off-w entries i.i.d. standard complex normal; x_w = rho * sum_{k != w} |x_k|.
ComplexGrid generate_schwarz_object(const SchwarzSpec& spec);

// |X_{-w}(z)| sampled on an oversampled torus grid (factor per axis).
double max_off_anchor_modulus(const ComplexGrid& x, const MultiIndex& w, std::size_t oversample = 8);
bool check_schwarz(const ComplexGrid& x, const MultiIndex& w, std::size_t oversample = 8);

// y = |dft_oversampled(x, m)|^2, requires m >= 2n.
RealGrid measure(const ComplexGrid& x, const Shape& m);
Shape oversampled_shape(const Shape& n, std::size_t factor = 2);

double noise_variance(double snr_db, double truth_norm_sq);
// snr_db = +inf leaves y untouched. Results are floored at 1e-12 * max(y).
RealGrid add_gaussian_noise(const RealGrid& y, double snr_db, double truth_norm_sq, std::uint64_t seed);
inline constexpr double kPositivityFloor = 1e-12;

DecayMask build_decay_mask(const RealGrid& magnitudes, const MultiIndex& w, double margin = 2.0);
DecayMask decay_mask_with_base(const Shape& support, const MultiIndex& w, double r);

void save_instance(const std::string& dir, const Instance& inst);
Instance load_instance(const std::string& dir);

}  // namespace fastphase
