#include "doctest.h"
#include "fastphase/instance.hpp"
#include "fastphase/pipeline.hpp"
#include "fastphase/schwarz.hpp"
#include "fastphase/trust_region.hpp"
#include "test_support.hpp"

using namespace fastphase;
using namespace fastphase::testing;

namespace {

ComplexGrid scaled(const ComplexGrid& g, double s) {
  ComplexGrid out = g;
  for (auto& v : out) v *= s;
  return out;
}

struct Problem {
  ComplexGrid x;
  RealGrid y;
  ComplexGrid x0;
};

Problem schwarz_problem(const Shape& n, const MultiIndex& w, std::uint64_t seed) {
  Problem p;
  p.x = generate_schwarz_object({n, w, 2.0, seed});
  p.y = measure(p.x, n.scaled(2));
  p.x0 = schwarz_init(p.y, w, n);
  return p;
}

}  // namespace

TEST_CASE("Steihaug CG on simple operators") {
  const ComplexGrid g = random_grid(Shape{5}, 1);
  const StackedOperator identity = [](const ComplexGrid& u) { return u; };

  const SteihaugResult interior = steihaug_cg(g, identity, 1e6, nullptr, 1e-12, 50);
  CHECK(max_abs_diff(interior.step, scaled(g, -1)) < 1e-14);
  CHECK(interior.iterations == 1);
  CHECK_FALSE(interior.boundary_hit);

  const SteihaugResult clipped = steihaug_cg(g, identity, 0.1, nullptr, 1e-12, 50);
  CHECK(clipped.boundary_hit);
  CHECK(norm2(clipped.step) == doctest::Approx(0.1));
  CHECK(max_abs_diff(clipped.step, scaled(g, -0.1 / norm2(g))) < 1e-14);

  const StackedOperator negative = [](const ComplexGrid& u) { return scaled(u, -1); };
  const SteihaugResult neg = steihaug_cg(g, negative, 2.0, nullptr, 1e-12, 50);
  CHECK(neg.neg_curv);
  CHECK(norm2(neg.step) == doctest::Approx(2.0));

  // Diagonal SPD system: CG solves it exactly, and the matching
  // preconditioner does so in one iteration.
  StackedDiagonal d{RealGrid(Shape{5}, {1, 2, 3, 4, 5}), RealGrid(Shape{5}, {6, 7, 8, 9, 10})};
  const StackedOperator diag = [&](const ComplexGrid& u) {
    ComplexGrid out(u.shape());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = Complex(d.re[i] * u[i].real(), d.im[i] * u[i].imag());
    return out;
  };
  ComplexGrid expected(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) expected[i] = Complex(-g[i].real() / d.re[i], -g[i].imag() / d.im[i]);
  const SteihaugResult solved = steihaug_cg(g, diag, 1e6, nullptr, 1e-13, 50);
  CHECK(max_abs_diff(solved.step, expected) < 1e-10);
  const SteihaugResult pre = steihaug_cg(g, diag, 1e6, &d, 1e-13, 50);
  CHECK(pre.iterations == 1);
  CHECK(max_abs_diff(pre.step, expected) < 1e-12);

  CHECK(steihaug_cg(ComplexGrid(Shape{5}), identity, 1.0, nullptr, 1e-6, 10).iterations == 0);
  CHECK_THROWS_AS(steihaug_cg(g, identity, 0.0, nullptr, 1e-6, 10), ParameterError);
}

TEST_CASE("starting at the solution stops immediately") {
  const Problem p = schwarz_problem(Shape{4, 4}, {0, 0}, 2);
  const SolveReport r = minimize(p.y, p.x, CostKind::normalized({0, 0}));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.x_final == p.x);
}

TEST_CASE("converges from the Schwarz start on a 16x16 object") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Problem p = schwarz_problem(Shape{16, 16}, {0, 0}, seed);
    const SolveReport r = minimize(p.y, p.x0, CostKind::normalized({0, 0}));
    CAPTURE(seed);
    CHECK(r.converged);
    CHECK(r.iterations <= 50);
    CHECK(aligned_relative_error(r.x_final, p.x) <= 1e-8);
    for (std::size_t i = 1; i < r.cost_trace.size(); ++i) CHECK(r.cost_trace[i] <= r.cost_trace[i - 1]);
    REQUIRE(r.cost_trace.size() == r.grad_norm_trace.size());
    for (double radius : r.radius_trace) CHECK(radius <= 10.0 * norm2(p.x0) * (1 + 1e-12));
  }
}

TEST_CASE("iteration count grows slowly with size") {
  int small = 0, large = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Problem q = schwarz_problem(Shape{4, 4}, {0, 0}, seed);
    small += minimize(q.y, q.x0, CostKind::normalized({0, 0})).iterations;
    const Problem p = schwarz_problem(Shape{32, 32}, {0, 0}, seed);
    large += minimize(p.y, p.x0, CostKind::normalized({0, 0})).iterations;
  }
  // 64 times the unknowns; allow a few extra iterations per doubling.
  CHECK(large <= small + 3 * 6 * 4);
}

TEST_CASE("solver is deterministic") {
  const Problem p = schwarz_problem(Shape{6, 6}, {2, 3}, 9);
  const SolveReport a = minimize(p.y, p.x0, CostKind::regularized({2, 3}));
  const SolveReport b = minimize(p.y, p.x0, CostKind::regularized({2, 3}));
  CHECK(a.x_final == b.x_final);
  CHECK(a.cost_trace == b.cost_trace);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("non-finite start raises divergence with a report") {
  const Problem p = schwarz_problem(Shape{4, 4}, {0, 0}, 3);
  ComplexGrid bad = p.x0;
  bad[3] = Complex(std::nan(""), 0);
  try {
    minimize(p.y, bad, CostKind::least_squares());
    FAIL("expected divergence");
  } catch (const SolverDivergence& e) {
    CHECK_FALSE(e.report().converged);
  }
  CHECK_THROWS_AS(wirtinger_flow(p.y, bad, CostKind::least_squares()), SolverDivergence);
}

TEST_CASE("configuration validation") {
  const Problem p = schwarz_problem(Shape{2, 2}, {0, 0}, 1);
  TrustRegionConfig cfg;
  cfg.eta_accept = 0.3;
  CHECK_THROWS_AS(minimize(p.y, p.x0, CostKind::least_squares(), cfg), ParameterError);
  cfg = {};
  cfg.shrink = 1.0;
  CHECK_THROWS_AS(minimize(p.y, p.x0, CostKind::least_squares(), cfg), ParameterError);
  cfg = {};
  cfg.grow = 1.0;
  CHECK_THROWS_AS(minimize(p.y, p.x0, CostKind::least_squares(), cfg), ParameterError);
}

TEST_CASE("Wirtinger flow descends from the Schwarz start and stalls at the origin") {
  const Problem p = schwarz_problem(Shape{3, 3}, {0, 0}, 4);
  const SolveReport r = wirtinger_flow(p.y, p.x0, CostKind::least_squares(), {0, 20000, 1e-6 * sum(p.y), 60});
  for (std::size_t i = 1; i < r.cost_trace.size(); ++i) CHECK(r.cost_trace[i] <= r.cost_trace[i - 1]);
  CHECK(r.cost_trace.back() < r.cost_trace.front());

  const SolveReport saddle = wirtinger_flow(p.y, ComplexGrid(p.x.shape()), CostKind::least_squares());
  CHECK_FALSE(saddle.converged);
  CHECK(saddle.stop_reason == "stationary point");
  CHECK(saddle.iterations == 0);
}
