#pragma once

#include <cstddef>

#include "fastphase/tensor.hpp"

namespace fastphase {

struct SchwarzConfig {
  std::size_t oversample_factor = 1;
};

// Values of the measurement's interpolating trigonometric polynomial on the
// grid refined by `factor` along every axis.
RealGrid resample_measurement(const RealGrid& y, std::size_t factor);

// Log-domain boundary values: real part log y, imaginary part its index-w
// conjugate. Computed on the refined grid and decimated back to y's shape.
ComplexGrid discrete_schwarz_transform(const RealGrid& y, const MultiIndex& w, const SchwarzConfig& cfg = {});

// x0 = coefficients of exp(S/2) shifted by w, truncated to the support box.
ComplexGrid schwarz_init(const RealGrid& y, const MultiIndex& w, const Shape& support,
                         const SchwarzConfig& cfg = {});

// out[(2w - i) mod n] = conj(x_i) for i != w, out[w] = 0.
ComplexGrid conj_flip(const ComplexGrid& x, const MultiIndex& w);

// Coefficients on the m-grid of x plus its conjugate reflection about w,
// keeping only reflected terms in the half-region [0, ceil(m/2)) per axis.
ComplexGrid schwarz_identity_coefficients(const ComplexGrid& x, const MultiIndex& w, const Shape& m);

// max_k |exp(S/2) z^w - (X + X^dagger)_k| / max_k |X + X^dagger|, global phase
// fixed by x_w. Measures how far the transform is from the sampled identity.
double schwarz_identity_error(const ComplexGrid& x, const MultiIndex& w, const Shape& m,
                              const SchwarzConfig& cfg = {});

// Values of exp(S/2) z^w on y's grid: the unitary DFT of schwarz_init's
// coefficients before truncation.
ComplexGrid schwarz_exp_half(const RealGrid& y, const MultiIndex& w, const SchwarzConfig& cfg = {});

// max|a - b| / max|b|
double max_relative_deviation(const ComplexGrid& a, const ComplexGrid& b);

// Relative max deviation of exp(S/2) on the m-grid from the same quantity
// computed at a much finer quadrature (reference_factor).
double schwarz_quadrature_error(const RealGrid& y, const MultiIndex& w, std::size_t factor,
                                std::size_t reference_factor);

}  // namespace fastphase
