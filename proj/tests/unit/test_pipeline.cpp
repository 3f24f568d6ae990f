#include "doctest.h"
#include "fastphase/fft.hpp"
#include "fastphase/instance.hpp"
#include "fastphase/pipeline.hpp"
#include "test_support.hpp"

using namespace fastphase;
using namespace fastphase::testing;

TEST_CASE("a delta is recovered exactly without iterating") {
  ComplexGrid x(Shape{4, 5});
  x.at({1, 3}) = 3.0;
  const RealGrid y = measure(x, Shape{8, 10});
  FastPhaseOptions opts;
  opts.w = MultiIndex{1, 3};
  const FastPhaseResult r = fast_phase_retrieve(y, x.shape(), opts);
  CHECK(r.report.iterations == 0);
  CHECK(max_abs_diff(r.x, x) < 1e-12);

  const FastPhaseResult est = fast_phase_retrieve(y, x.shape());
  CHECK(est.report.iterations == 0);
  CHECK(aligned_relative_error(est.x, x) < 1e-12);
}

TEST_CASE("Schwarz objects are recovered from their measurement") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Shape n{8, 8};
    Rng rng(seed + 77);
    const MultiIndex w = uniform_index(n, rng);
    const ComplexGrid x = generate_schwarz_object({n, w, 2.0, seed});
    const FastPhaseResult r = fast_phase_retrieve(measure(x, n.scaled(2)), n);
    CAPTURE(seed);
    CHECK(r.report.converged);
    CHECK(aligned_relative_error(r.x, x) <= 1e-8);
    CHECK(same_up_to_reflection(r.w, w, n));
  }
}

TEST_CASE("ambiguous centre index is resolved by restarts") {
  const Shape n{5, 5};
  CHECK(winding_is_ambiguous({2, 2}, n, nullptr));
  CHECK_FALSE(winding_is_ambiguous({0, 1}, n, nullptr));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexGrid x = generate_schwarz_object({n, {2, 2}, 2.0, seed});
    const FastPhaseResult r = fast_phase_retrieve(measure(x, n.scaled(2)), n);
    CAPTURE(seed);
    CHECK(aligned_relative_error(r.x, x) <= 1e-8);
    CHECK(r.attempts >= 1);
  }
}

TEST_CASE("pipeline validation") {
  CHECK_THROWS_AS(fast_phase_retrieve(RealGrid(Shape{6}, 1.0), Shape{4}), DimensionError);
  CHECK_THROWS_AS(fast_phase_retrieve(RealGrid(Shape{8}, {1, 1, 0, 1, 1, 1, 1, 1}), Shape{4}), DomainError);
  FastPhaseOptions opts;
  opts.w = MultiIndex{4};
  CHECK_THROWS_AS(fast_phase_retrieve(RealGrid(Shape{8}, 1.0), Shape{4}, opts), ParameterError);
  opts = {};
  opts.restarts = -1;
  CHECK_THROWS_AS(fast_phase_retrieve(RealGrid(Shape{8}, 1.0), Shape{4}, opts), ParameterError);
}

TEST_CASE("decay mask anchors") {
  const ComplexGrid x = generate_schwarz_object({Shape{4, 4}, {1, 2}, 2.0, 5});
  const DecayMask arg = select_decay_mask(abs(x), 2.0, MaskAnchor::kArgmax);
  CHECK(arg.anchor == MultiIndex{1, 2});
  CHECK(arg.r == 1.0);

  const RealGrid m(Shape{2, 2}, {1.0, 0.5, 0.5, 8.0});
  const DecayMask corner = select_decay_mask(m);
  CHECK(corner.anchor == MultiIndex{1, 1});
  CHECK(corner.r == 1.0);

  CHECK_THROWS_AS(select_decay_mask(RealGrid(Shape{3, 3}, 0.0)), InfeasibleError);
  RealGrid centre_only(Shape{3, 3}, 0.0);
  centre_only.at({1, 1}) = 1.0;
  CHECK_THROWS_AS(select_decay_mask(centre_only), InfeasibleError);
  CHECK(select_decay_mask(centre_only, 2.0, MaskAnchor::kArgmax).anchor == MultiIndex{1, 1});
  CHECK_THROWS_AS(select_decay_mask(RealGrid(Shape{2}, {1.0, -1.0})), DomainError);
  CHECK(parse_mask_anchor(to_string(MaskAnchor::kArgmax)) == MaskAnchor::kArgmax);
  CHECK(parse_mask_anchor("corner") == MaskAnchor::kBestCorner);
  CHECK_THROWS_AS(parse_mask_anchor("middle"), ParameterError);
}

TEST_CASE("masked two-shot recovery of a generic object") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexGrid x = random_grid(Shape{6, 6}, 300 + seed);
    const MaskedMeasurement mm = masked_measurements(x);
    const MaskedResult r = masked_fast_phase(mm.abs_x, mm.y2);
    CAPTURE(seed);
    CHECK(r.mask.anchor == mm.mask.anchor);
    CHECK(aligned_relative_error(r.x, x) <= 1e-6);
  }
}

TEST_CASE("masked recovery reports underflow") {
  RealGrid m(Shape{400}, 1.0);
  m[0] = 1e-10;
  m[399] = 1e-10;
  CHECK_THROWS_AS(masked_fast_phase(m, RealGrid(Shape{800}, 1.0)), InfeasibleError);
}

TEST_CASE("alignment over shift, phase and conjugate reflection") {
  const ComplexGrid t = random_grid(Shape{4, 6}, 15);
  ComplexGrid moved = circular_shift(t, {1, -2});
  for (auto& v : moved) v *= std::polar(1.0, 2.0);
  const AlignmentResult a = align(moved, t);
  CHECK(a.residual < 1e-12);
  CHECK_FALSE(a.flipped);

  const AlignmentResult f = align(conj_reflect(moved), t);
  CHECK(f.residual < 1e-12);
  CHECK(f.flipped);

  const AlignmentResult again = align(a.aligned, t);
  CHECK(again.shift == MultiIndex{0, 0});
  CHECK(std::abs(again.phase - Complex(1.0)) < 1e-12);
  CHECK(max_abs_diff(again.aligned, a.aligned) < 1e-12);

  CHECK(conj_reflect(conj_reflect(t)) == t);
  CHECK_THROWS_AS(align(t, random_grid(Shape{6, 4}, 1)), DimensionError);
}

TEST_CASE("relative error in decibels") {
  const ComplexGrid t = random_grid(Shape{3, 3}, 16);
  CHECK(rmse_db(t, t) == kRmseFloorDb);
  ComplexGrid c = t;
  for (auto& v : c) v *= 1.1;
  CHECK(aligned_relative_error(c, t) == doctest::Approx(0.1));
  CHECK(rmse_db(c, t) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(aligned_relative_error(t, ComplexGrid(t.shape())), DomainError);
}
