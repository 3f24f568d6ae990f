#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "fastphase/tensor.hpp"

namespace fastphase {

enum class CostVariant { kLeastSquares, kRegularized, kNormalized };

struct CostKind {
  CostVariant variant = CostVariant::kNormalized;
  double lambda = 1.0;
  MultiIndex w;

  static CostKind least_squares() { return {CostVariant::kLeastSquares, 0.0, {}}; }
  static CostKind regularized(MultiIndex w, double lambda = 1.0) {
    return {CostVariant::kRegularized, lambda, std::move(w)};
  }
  static CostKind normalized(MultiIndex w, double lambda = 1.0) {
    return {CostVariant::kNormalized, lambda, std::move(w)};
  }
  bool regularized_term() const { return variant != CostVariant::kLeastSquares && lambda != 0.0; }
};

const char* to_string(CostVariant v);

// Both Wirtinger Hessian blocks applied to u: H_xx[u] and H_x̄x[ū]. The
// directional derivative of the cogradient along u is their sum.
struct HessianAction {
  ComplexGrid xx;
  ComplexGrid xbar_x;
};

// Diagonal of the real-imaginary stacked Hessian.
struct StackedDiagonal {
  RealGrid re;
  RealGrid im;
};

// Caches the spectrum at the current point so cost, cogradient, and Hessian
// actions share one forward transform.
//
//   LS:          f = 1/4 sum (|X|^2 - y)^2
//   REG:         LS + (lambda/2) Im(x_w)^2
//   NORMALIZED:  1/8 sum (|X|^2 - y)^2 / y + (lambda/2) Im(x_w)^2
//
// with X = dft_oversampled(x, y.shape()).
class WirtingerModel {
 public:
  WirtingerModel(const RealGrid& y, const Shape& support, CostKind kind);

  void set_point(const ComplexGrid& x);
  const ComplexGrid& point() const { return x_; }
  const ComplexGrid& spectrum() const { return X_; }

  double cost() const;
  ComplexGrid gradient() const;  // cogradient, d f / d x̄
  HessianAction hvp(const ComplexGrid& u) const;
  // H_xx[u] + H_x̄x[ū] using a single adjoint transform.
  ComplexGrid hessian_apply(const ComplexGrid& u) const;
  StackedDiagonal diagonal() const;

  const RealGrid& y() const { return *y_; }
  const Shape& support() const { return support_; }
  const CostKind& kind() const { return kind_; }

 private:
  const RealGrid* y_;
  Shape support_;
  CostKind kind_;
  std::size_t w_flat_ = 0;
  ComplexGrid x_;
  ComplexGrid X_;
  std::vector<double> residual_;  // |X|^2 - y
};

double cost(const ComplexGrid& x, const RealGrid& y, const CostKind& kind);
ComplexGrid gradient(const ComplexGrid& x, const RealGrid& y, const CostKind& kind);
HessianAction hvp(const ComplexGrid& x, const ComplexGrid& u, const RealGrid& y, const CostKind& kind);

// Stacked ordering: [Re x_0 .. Re x_{N-1}, Im x_0 .. Im x_{N-1}].
inline constexpr std::size_t kDenseHessianMaxN = 256;
Eigen::MatrixXd hessian_dense(const ComplexGrid& x, const RealGrid& y, const CostKind& kind);

// Exact stacked diagonal floored at floor_rel * max entry.
inline constexpr double kPreconditionerFloor = 1e-8;
StackedDiagonal diag_preconditioner(const ComplexGrid& x, const RealGrid& y, const CostKind& kind,
                                    double floor_rel = kPreconditionerFloor);

struct BasinReport {
  double lhs = 0;   // |F eps|_4^4
  double rhs = 0;   // <|F eps|^2, |Re(F eps conj(F x_opt))|>
  bool inside = false;
  double vdot = 0;  // Lyapunov derivative along the gradient flow
};

// eps = x_opt - x0 for the basin inequality; vdot is evaluated in error
// coordinates x0 - x_opt. Spectra use y.shape().
BasinReport basin_check(const ComplexGrid& x0, const ComplexGrid& x_opt, const RealGrid& y, const MultiIndex& w);

// -vdot expressed through the error spectrum; see basin_check.
double lyapunov_vdot(const ComplexGrid& eps, const ComplexGrid& x_opt, const MultiIndex& w, const Shape& m);

// |(p + |E|_4^4 - <|E|^2,|R|>) - 2 || |E|^2 - |R| ||^2| with E = F eps,
// R = Re(E conj(F x_opt)), p = |E|_4^4 - 3<|E|^2,|R|> + 2|R|^2.
// m defaults to 2n.
double sos_identity_residual(const ComplexGrid& eps, const ComplexGrid& x_opt, const MultiIndex& w,
                             const Shape& m = Shape());

struct ConditionPoint {
  double ratio;
  double condition;
};

// Condition numbers of the dense stacked Hessian at noiseless solutions
// whose first entry is ratio * sum of the other magnitudes (w = 0).
std::vector<ConditionPoint> condition_study(const std::vector<double>& ratios, const Shape& shape,
                                            CostVariant variant, bool precondition, std::uint64_t seed = 0);

// 2-norm condition number of a symmetric matrix.
double symmetric_condition(const Eigen::MatrixXd& H);
Eigen::MatrixXd jacobi_scaled(const Eigen::MatrixXd& H, const StackedDiagonal& diag);

}  // namespace fastphase
