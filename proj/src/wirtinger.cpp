#include "fastphase/wirtinger.hpp"

#include <algorithm>
#include <cmath>

#include "fastphase/fft.hpp"
#include "fastphase/instance.hpp"
#include "fastphase/rng.hpp"

namespace fastphase {

const char* to_string(CostVariant v) {
  switch (v) {
    case CostVariant::kLeastSquares: return "ls";
    case CostVariant::kRegularized: return "reg";
    case CostVariant::kNormalized: return "normalized";
  }
  return "?";
}

WirtingerModel::WirtingerModel(const RealGrid& y, const Shape& support, CostKind kind)
    : y_(&y), support_(support), kind_(std::move(kind)) {
  if (!y.shape().dominates(support)) throw DimensionError("measurement shape smaller than support");
  if (kind_.variant != CostVariant::kLeastSquares) {
    if (!support_.contains(kind_.w)) throw ParameterError("cost anchor w outside support");
    w_flat_ = support_.flat(kind_.w);
  }
  if (kind_.lambda < 0) throw ParameterError("lambda must be >= 0");
  if (kind_.variant == CostVariant::kNormalized)
    for (double v : y)
      if (!(v > 0)) throw DomainError("normalized cost requires strictly positive y");
}

void WirtingerModel::set_point(const ComplexGrid& x) {
  if (x.shape() != support_) throw DimensionError("point shape does not match support");
  x_ = x;
  X_ = dft_oversampled(x, y_->shape());
  residual_.resize(X_.size());
  for (std::size_t k = 0; k < X_.size(); ++k) residual_[k] = std::norm(X_[k]) - (*y_)[k];
}

double WirtingerModel::cost() const {
  const auto& y = *y_;
  double f = 0;
  if (kind_.variant == CostVariant::kNormalized) {
    for (std::size_t k = 0; k < residual_.size(); ++k) f += residual_[k] * residual_[k] / y[k];
    f *= 0.125;
  } else {
    for (double r : residual_) f += r * r;
    f *= 0.25;
  }
  if (kind_.regularized_term()) {
    const double im = x_[w_flat_].imag();
    f += 0.5 * kind_.lambda * im * im;
  }
  return f;
}

ComplexGrid WirtingerModel::gradient() const {
  const auto& y = *y_;
  ComplexGrid Z(X_.shape());
  if (kind_.variant == CostVariant::kNormalized) {
    for (std::size_t k = 0; k < Z.size(); ++k) Z[k] = (0.25 * residual_[k] / y[k]) * X_[k];
  } else {
    for (std::size_t k = 0; k < Z.size(); ++k) Z[k] = (0.5 * residual_[k]) * X_[k];
  }
  ComplexGrid g = dft_adjoint(Z, support_);
  if (kind_.regularized_term()) g[w_flat_] += Complex(0.0, 0.5 * kind_.lambda * x_[w_flat_].imag());
  return g;
}

namespace {

struct Weights {
  double beta;
  double gamma;
};

inline Weights weights(CostVariant v, double abs2, double r, double y) {
  if (v == CostVariant::kNormalized) return {0.25 * (r + abs2) / y, 0.25 / y};
  return {0.5 * (r + abs2), 0.5};
}

}  // namespace

ComplexGrid WirtingerModel::hessian_apply(const ComplexGrid& u) const {
  const auto& y = *y_;
  ComplexGrid U = dft_oversampled(u, y.shape());
  for (std::size_t k = 0; k < U.size(); ++k) {
    const auto [beta, gamma] = weights(kind_.variant, std::norm(X_[k]), residual_[k], y[k]);
    U[k] = beta * U[k] + gamma * X_[k] * X_[k] * std::conj(U[k]);
  }
  ComplexGrid out = dft_adjoint(U, support_);
  if (kind_.regularized_term()) out[w_flat_] += Complex(0.0, 0.5 * kind_.lambda * u[w_flat_].imag());
  return out;
}

HessianAction WirtingerModel::hvp(const ComplexGrid& u) const {
  const auto& y = *y_;
  ComplexGrid U = dft_oversampled(u, y.shape());
  ComplexGrid A(U.shape()), B(U.shape());
  for (std::size_t k = 0; k < U.size(); ++k) {
    const auto [beta, gamma] = weights(kind_.variant, std::norm(X_[k]), residual_[k], y[k]);
    A[k] = beta * U[k];
    B[k] = gamma * X_[k] * X_[k] * std::conj(U[k]);
  }
  HessianAction h{dft_adjoint(A, support_), dft_adjoint(B, support_)};
  if (kind_.regularized_term()) {
    const double q = 0.25 * kind_.lambda;
    h.xx[w_flat_] += q * u[w_flat_];
    h.xbar_x[w_flat_] -= q * std::conj(u[w_flat_]);
  }
  return h;
}

StackedDiagonal WirtingerModel::diagonal() const {
  const auto& y = *y_;
  const Shape& m = y.shape();
  const double inv_m = 1.0 / static_cast<double>(m.size());
  double a_diag = 0;
  ComplexGrid q(m);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const auto [beta, gamma] = weights(kind_.variant, std::norm(X_[k]), residual_[k], y[k]);
    a_diag += beta;
    q[k] = gamma * X_[k] * X_[k];
  }
  a_diag *= inv_m;
  // B_ii = (1/M) sum_k q_k exp(+2πj k·(2i)/m): an inverse transform sampled at 2i.
  fft_inplace(q, FftDirection::kBackward);

  StackedDiagonal d{RealGrid(support_), RealGrid(support_)};
  MultiIndex twice(support_.rank());
  for_each_index(support_, [&](const MultiIndex& i, std::size_t flat) {
    for (std::size_t a = 0; a < i.size(); ++a) twice[a] = 2 * i[a];
    double a_ii = a_diag;
    Complex b_ii = q[m.flat_wrapped(twice)] * inv_m;
    if (kind_.regularized_term() && flat == w_flat_) {
      a_ii += 0.25 * kind_.lambda;
      b_ii -= 0.25 * kind_.lambda;
    }
    d.re[flat] = 2.0 * (a_ii + b_ii.real());
    d.im[flat] = 2.0 * (a_ii - b_ii.real());
  });
  return d;
}

double cost(const ComplexGrid& x, const RealGrid& y, const CostKind& kind) {
  WirtingerModel model(y, x.shape(), kind);
  model.set_point(x);
  return model.cost();
}

ComplexGrid gradient(const ComplexGrid& x, const RealGrid& y, const CostKind& kind) {
  WirtingerModel model(y, x.shape(), kind);
  model.set_point(x);
  return model.gradient();
}

HessianAction hvp(const ComplexGrid& x, const ComplexGrid& u, const RealGrid& y, const CostKind& kind) {
  WirtingerModel model(y, x.shape(), kind);
  model.set_point(x);
  return model.hvp(u);
}

Eigen::MatrixXd hessian_dense(const ComplexGrid& x, const RealGrid& y, const CostKind& kind) {
  const std::size_t n = x.size();
  if (n > kDenseHessianMaxN)
    throw SizeGuardError("dense Hessian limited to N <= " + std::to_string(kDenseHessianMaxN) + ", got " +
                         std::to_string(n));
  WirtingerModel model(y, x.shape(), kind);
  model.set_point(x);
  Eigen::MatrixXd H(2 * n, 2 * n);
  ComplexGrid u(x.shape());
  for (std::size_t col = 0; col < 2 * n; ++col) {
    std::fill(u.begin(), u.end(), Complex(0.0));
    u[col % n] = col < n ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    ComplexGrid h = model.hessian_apply(u);
    for (std::size_t i = 0; i < n; ++i) {
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = 2.0 * h[i].real();
      H(static_cast<Eigen::Index>(n + i), static_cast<Eigen::Index>(col)) = 2.0 * h[i].imag();
    }
  }
  return H;
}

StackedDiagonal diag_preconditioner(const ComplexGrid& x, const RealGrid& y, const CostKind& kind,
                                    double floor_rel) {
  WirtingerModel model(y, x.shape(), kind);
  model.set_point(x);
  StackedDiagonal d = model.diagonal();
  if (floor_rel > 0) {
    const double mx = std::max(max_value(d.re), max_value(d.im));
    const double floor = floor_rel * std::max(mx, 0.0);
    for (auto& v : d.re) v = std::max(v, floor);
    for (auto& v : d.im) v = std::max(v, floor);
  }
  return d;
}

namespace {

struct ErrorSpectra {
  double e4 = 0;      // sum |E|^4
  double e2r = 0;     // sum |E|^2 |R|
  double e2r_signed = 0;
  double r2 = 0;      // sum R^2
  double sos = 0;     // sum (|E|^2 - |R|)^2
};

ErrorSpectra error_spectra(const ComplexGrid& eps, const ComplexGrid& x_opt, const Shape& m) {
  const ComplexGrid E = dft_oversampled(eps, m);
  const ComplexGrid Xs = dft_oversampled(x_opt, m);
  ErrorSpectra s;
  for (std::size_t k = 0; k < E.size(); ++k) {
    const double e2 = std::norm(E[k]);
    const double r = (E[k] * std::conj(Xs[k])).real();
    s.e4 += e2 * e2;
    s.e2r += e2 * std::abs(r);
    s.e2r_signed += e2 * r;
    s.r2 += r * r;
    const double diff = e2 - std::abs(r);
    s.sos += diff * diff;
  }
  return s;
}

}  // namespace

double lyapunov_vdot(const ComplexGrid& eps, const ComplexGrid& x_opt, const MultiIndex& w, const Shape& m) {
  const ErrorSpectra s = error_spectra(eps, x_opt, m);
  const double im = eps.at(w).imag();
  return -(s.e4 + 3.0 * s.e2r_signed + 2.0 * s.r2 + im * im);
}

BasinReport basin_check(const ComplexGrid& x0, const ComplexGrid& x_opt, const RealGrid& y, const MultiIndex& w) {
  if (x0.shape() != x_opt.shape()) throw DimensionError("basin_check shapes differ");
  ComplexGrid eps(x0.shape());
  bool zero = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    eps[i] = x_opt[i] - x0[i];
    if (eps[i] != Complex(0.0)) zero = false;
  }
  const ErrorSpectra s = error_spectra(eps, x_opt, y.shape());
  BasinReport r;
  r.lhs = s.e4;
  r.rhs = s.e2r;
  r.inside = zero || r.lhs < r.rhs;
  for (auto& v : eps) v = -v;
  r.vdot = zero ? 0.0 : lyapunov_vdot(eps, x_opt, w, y.shape());
  return r;
}

double sos_identity_residual(const ComplexGrid& eps, const ComplexGrid& x_opt, const MultiIndex& w,
                             const Shape& m) {
  if (eps.shape() != x_opt.shape()) throw DimensionError("sos_identity_residual shapes differ");
  if (!eps.shape().contains(w)) throw ParameterError("w outside support");
  const Shape grid = m.rank() == 0 ? eps.shape().scaled(2) : m;
  const ErrorSpectra s = error_spectra(eps, x_opt, grid);
  const double p = s.e4 - 3.0 * s.e2r + 2.0 * s.r2;
  const double lhs = p + s.e4 - s.e2r;
  const double rhs = 2.0 * s.sos;
  return std::abs(lhs - rhs);
}

double symmetric_condition(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues().cwiseAbs();
  return ev.maxCoeff() / ev.minCoeff();
}

Eigen::MatrixXd jacobi_scaled(const Eigen::MatrixXd& H, const StackedDiagonal& diag) {
  const std::size_t n = diag.re.size();
  Eigen::VectorXd s(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(diag.re[i]);
    s(static_cast<Eigen::Index>(n + i)) = 1.0 / std::sqrt(diag.im[i]);
  }
  return s.asDiagonal() * H * s.asDiagonal();
}

std::vector<ConditionPoint> condition_study(const std::vector<double>& ratios, const Shape& shape,
                                            CostVariant variant, bool precondition, std::uint64_t seed) {
  if (shape.size() > kDenseHessianMaxN)
    throw SizeGuardError("condition study limited to N <= " + std::to_string(kDenseHessianMaxN));
  std::vector<ConditionPoint> out;
  const MultiIndex w(shape.rank(), 0);
  const CostKind kind = variant == CostVariant::kLeastSquares ? CostKind::least_squares()
                        : variant == CostVariant::kRegularized ? CostKind::regularized(w)
                                                               : CostKind::normalized(w);
  for (double ratio : ratios) {
    Rng rng(seed);
    ComplexGrid x = complex_gaussian(shape, rng);
    double l1 = 0;
    for (std::size_t i = 1; i < x.size(); ++i) l1 += std::abs(x[i]);
    x[0] = ratio * l1;
    const RealGrid y = measure(x, shape.scaled(2));
    Eigen::MatrixXd H = hessian_dense(x, y, kind);
    if (precondition) H = jacobi_scaled(H, diag_preconditioner(x, y, kind));
    out.push_back({ratio, symmetric_condition(H)});
  }
  return out;
}

}  // namespace fastphase
