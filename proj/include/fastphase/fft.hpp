#pragma once

#include "fastphase/tensor.hpp"

namespace fastphase {

enum class FftDirection { kForward, kBackward };

// Unnormalized in-place transform over every axis. Forward uses exp(-2πj k·i/m).
void fft_inplace(ComplexGrid& g, FftDirection dir);
ComplexGrid fft(const ComplexGrid& g);
ComplexGrid ifft(const ComplexGrid& g);

// Unitary oversampled DFT: X_k = M^{-1/2} sum_i x_i exp(-2πj k·(i/m)).
ComplexGrid dft_oversampled(const ComplexGrid& x, const Shape& m);
// Unitary DFT on the grid's own shape.
ComplexGrid dft(const ComplexGrid& x);
// Unitary inverse DFT on the grid's own shape (+ sign, M^{-1/2}).
ComplexGrid idft(const ComplexGrid& X);
// Adjoint of dft_oversampled(·, X.shape()) restricted to support n.
ComplexGrid dft_adjoint(const ComplexGrid& X, const Shape& n);

}  // namespace fastphase
