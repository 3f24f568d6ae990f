#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fastphase/instance.hpp"
#include "fastphase/trust_region.hpp"
#include "fastphase/wirtinger.hpp"
#include "test_support.hpp"

using namespace fastphase;
using namespace fastphase::testing;

namespace {

ComplexGrid plus(const ComplexGrid& x, double t, const ComplexGrid& u) {
  ComplexGrid out = x;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += t * u[i];
  return out;
}

std::vector<CostKind> all_kinds(const MultiIndex& w) {
  return {CostKind::least_squares(), CostKind::regularized(w, 0.7), CostKind::normalized(w, 1.3)};
}

// Dense O(N·M) evaluation of each cost from its definition.
double cost_oracle(const ComplexGrid& x, const RealGrid& y, const CostKind& k) {
  const ComplexGrid X = direct_dft(x, y.shape());
  double f = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = std::norm(X[i]) - y[i];
    f += k.variant == CostVariant::kNormalized ? r * r / (8 * y[i]) : r * r / 4;
  }
  if (k.regularized_term()) f += 0.5 * k.lambda * std::pow(x.at(k.w).imag(), 2);
  return f;
}

}  // namespace

TEST_CASE("cost examples") {
  const ComplexGrid x(Shape{1}, {Complex(1, 1)});
  const RealGrid y(Shape{2}, 1.0);
  // |X|^2 = 2 / 2 = 1 everywhere, so only the anchor term survives.
  CHECK(cost(x, y, CostKind::least_squares()) == doctest::Approx(0.0));
  CHECK(cost(x, y, CostKind::regularized({0}, 2.0)) == doctest::Approx(1.0));
  const RealGrid y2(Shape{2}, 3.0);
  CHECK(cost(x, y2, CostKind::least_squares()) == doctest::Approx(2.0));
  CHECK(cost(x, y2, CostKind::normalized({0}, 0.0)) == doctest::Approx(1.0 / 3));
}

TEST_CASE("costs match the direct oracle") {
  const ComplexGrid x = random_grid(Shape{3, 4}, 1);
  const RealGrid y = measure(random_grid(Shape{3, 4}, 2), Shape{6, 8});
  for (const CostKind& k : all_kinds({1, 2})) CHECK(cost(x, y, k) == doctest::Approx(cost_oracle(x, y, k)).epsilon(1e-12));
}

TEST_CASE("gradient vanishes at the solution and at the origin for least squares") {
  const ComplexGrid x = generate_schwarz_object({Shape{4, 4}, {0, 0}, 2.0, 4});
  const RealGrid y = measure(x, Shape{8, 8});
  for (const CostKind& k : all_kinds({0, 0})) CHECK(norm2(gradient(x, y, k)) < 1e-12 * norm2(x));
  CHECK(norm2(gradient(ComplexGrid(x.shape()), y, CostKind::least_squares())) == 0);
}

TEST_CASE("gradient and Hessian action agree with finite differences") {
  const ComplexGrid x = random_grid(Shape{3, 3}, 5);
  const RealGrid y = measure(random_grid(Shape{3, 3}, 6), Shape{6, 6});
  for (const CostKind& k : all_kinds({2, 1})) {
    const ComplexGrid g = gradient(x, y, k);
    WirtingerModel model(y, x.shape(), k);
    model.set_point(x);
    for (std::uint64_t d = 0; d < 20; ++d) {
      const ComplexGrid u = random_grid(x.shape(), 100 + d);
      const double t = 1e-6;
      const double fd = (cost(plus(x, t, u), y, k) - cost(plus(x, -t, u), y, k)) / (2 * t);
      CHECK(fd == doctest::Approx(2 * real_dot(g, u)).epsilon(1e-6));

      const ComplexGrid gp = gradient(plus(x, t, u), y, k);
      const ComplexGrid gm = gradient(plus(x, -t, u), y, k);
      ComplexGrid fdh(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) fdh[i] = (gp[i] - gm[i]) / (2 * t);
      const ComplexGrid h = model.hessian_apply(u);
      CHECK(relative_diff(h, fdh) < 1e-6);
      const HessianAction split = hvp(x, u, y, k);
      CHECK(relative_diff(plus(split.xx, 1.0, split.xbar_x), h) < 1e-12);
    }
  }
}

TEST_CASE("dense Hessian is symmetric and consistent with the action") {
  const ComplexGrid x = random_grid(Shape{2, 3}, 7);
  const RealGrid y = measure(random_grid(Shape{2, 3}, 8), Shape{4, 6});
  for (const CostKind& k : all_kinds({1, 1})) {
    const Eigen::MatrixXd H = hessian_dense(x, y, k);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
    const ComplexGrid u = random_grid(x.shape(), 9);
    Eigen::VectorXd v(12);
    for (std::size_t i = 0; i < 6; ++i) {
      v(static_cast<Eigen::Index>(i)) = u[i].real();
      v(static_cast<Eigen::Index>(6 + i)) = u[i].imag();
    }
    const Eigen::VectorXd Hv = H * v;
    WirtingerModel model(y, x.shape(), k);
    model.set_point(x);
    const ComplexGrid h = model.hessian_apply(u);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(Hv(static_cast<Eigen::Index>(i)) == doctest::Approx(2 * h[i].real()).epsilon(1e-10));
      CHECK(Hv(static_cast<Eigen::Index>(6 + i)) == doctest::Approx(2 * h[i].imag()).epsilon(1e-10));
    }
    const StackedDiagonal d = model.diagonal();
    for (std::size_t i = 0; i < 6; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      CHECK(std::abs(d.re[i] - H(ii, ii)) < 1e-10 * H.cwiseAbs().maxCoeff());
      CHECK(std::abs(d.im[i] - H(ii + 6, ii + 6)) < 1e-10 * H.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("normalized Hessian at a strongly dominant solution") {
  const Shape n{3, 3};
  ComplexGrid x = random_grid(n, 10);
  double l1 = 0;
  for (std::size_t i = 1; i < x.size(); ++i) l1 += std::abs(x[i]);
  x[0] = 1e6 * l1;
  const RealGrid y = measure(x, n.scaled(2));
  const Eigen::MatrixXd H = hessian_dense(x, y, CostKind::normalized({0, 0}));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd ev = es.eigenvalues();
  // Stacked scale 1/2: eigenvalues 1/2 except the anchor direction at 1.
  // The imaginary part of x_0 is pinned only by the anchor term.
  CHECK(ev.minCoeff() > 0);
  int halves = 0, ones = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i) - 0.5) < 1e-4) ++halves;
    if (std::abs(ev(i) - 1.0) < 1e-4) ++ones;
  }
  CHECK(halves + ones == static_cast<int>(ev.size()));
}

TEST_CASE("diagonal dominance at normalized solutions anchored at the origin") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexGrid x = generate_schwarz_object({Shape{4, 4}, {0, 0}, 2.0, seed});
    const Eigen::MatrixXd H = hessian_dense(x, measure(x, Shape{8, 8}), CostKind::normalized({0, 0}));
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      const double off = H.row(i).cwiseAbs().sum() - std::abs(H(i, i));
      CHECK(H(i, i) > off);
    }
  }
  const ComplexGrid x = generate_schwarz_object({Shape{4, 4}, {1, 2}, 2.0, 3});
  const Eigen::MatrixXd H = hessian_dense(x, measure(x, Shape{8, 8}), CostKind::normalized({1, 2}));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().minCoeff() > 0);
}

TEST_CASE("preconditioner matches the dense diagonal and speeds up CG") {
  ComplexGrid x = random_grid(Shape{6, 6}, 12);
  double l1 = 0;
  for (std::size_t i = 1; i < x.size(); ++i) l1 += std::abs(x[i]);
  x[0] = 10 * l1;
  const RealGrid y = measure(x, Shape{12, 12});
  const CostKind k = CostKind::regularized({0, 0});
  const StackedDiagonal d = diag_preconditioner(x, y, k, 0.0);
  const Eigen::MatrixXd H = hessian_dense(x, y, k);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    CHECK(std::abs(d.re[i] - H(ii, ii)) < 1e-10 * H.cwiseAbs().maxCoeff());
    CHECK(std::abs(d.im[i] - H(ii + 36, ii + 36)) < 1e-10 * H.cwiseAbs().maxCoeff());
  }
  WirtingerModel model(y, x.shape(), k);
  model.set_point(x);
  const StackedOperator op = [&](const ComplexGrid& u) {
    ComplexGrid h = model.hessian_apply(u);
    for (auto& v : h) v *= 2.0;
    return h;
  };
  const ComplexGrid g = random_grid(x.shape(), 13);
  const auto plain = steihaug_cg(g, op, 1e30, nullptr, 1e-10, 1000);
  const auto pre = steihaug_cg(g, op, 1e30, &d, 1e-10, 1000);
  CHECK(pre.iterations < plain.iterations);
}

TEST_CASE("basin checks") {
  const ComplexGrid x = generate_schwarz_object({Shape{4, 4}, {0, 0}, 2.0, 14});
  const RealGrid y = measure(x, Shape{8, 8});
  const BasinReport same = basin_check(x, x, y, {0, 0});
  CHECK(same.inside);
  CHECK(same.vdot == 0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    ComplexGrid eps = random_grid(x.shape(), 200 + s);
    for (auto& v : eps) v *= 1e-3 * norm2(x) / norm2(eps);
    const ComplexGrid x0 = plus(x, 1.0, eps);
    const BasinReport r = basin_check(x0, x, y, {0, 0});
    CHECK(r.inside);
    CHECK(r.vdot <= 0);
    const double res = sos_identity_residual(eps, x, {0, 0});
    CHECK(res <= 1e-10 * std::pow(norm2(eps), 2) * std::pow(norm2(x), 2));
  }

  // Far from the solution the quartic term dominates and the inequality fails.
  ComplexGrid far = x;
  for (auto& v : far) v *= -100.0;
  CHECK_FALSE(basin_check(far, x, y, {0, 0}).inside);
}

TEST_CASE("guards") {
  const RealGrid y(Shape{34, 34}, 1.0);
  CHECK_THROWS_AS(hessian_dense(ComplexGrid(Shape{17, 17}), y, CostKind::least_squares()), SizeGuardError);
  const RealGrid bad(Shape{4}, {1, 0, 1, 1});
  CHECK_THROWS_AS(cost(ComplexGrid(Shape{2}), bad, CostKind::normalized({0})), DomainError);
  CHECK(cost(ComplexGrid(Shape{2}), bad, CostKind::least_squares()) == doctest::Approx(0.75));
}
