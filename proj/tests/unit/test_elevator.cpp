#include "doctest.h"
#include "carpet/elevator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unit/maps.hpp"

using namespace carpet;

namespace {

const ElevatorContext& example() {
  static const ElevatorContext ctx = normalize(testmaps::carpet_map());
  return ctx;
}

const ElevatorContext& chebyshev() {
  static const ElevatorContext ctx = normalize(testmaps::quadratic(-2.0));
  return ctx;
}

RationalMap linear(double a) { return RationalMap(Polynomial({0.0, a}), Polynomial({1.0})); }

}  // namespace

TEST_CASE("normalization of the example map") {
  const ElevatorContext& c = example();
  const RationalMap f = testmaps::carpet_map();
  CHECK(c.period == 1);
  CHECK(c.N == 64);
  CHECK(c.julia_radius < 0.5);
  CHECK(c.outer_modulus > 1.0);
  CHECK(c.scale > 1.0);

  // m o f = F o m
  for (cplx z : {cplx(0.3, 0.1), cplx(-1.2, 0.7), cplx(0.05, -0.4)}) {
    const SpherePoint lhs = c.normalizer(f(SpherePoint(z)));
    const SpherePoint rhs = c.map(c.normalizer(SpherePoint(z)));
    CHECK(chordal_distance(lhs, rhs) < 1e-12);
  }
  // post = {0, +-i/2, inf} moved by z -> z / s.
  CHECK(c.post.size() == 4);
  for (cplx q : {cplx(0, 0), cplx(0, 0.5), cplx(0, -0.5)})
    CHECK(contains_point(c.post, SpherePoint(q / c.scale), 1e-9));
  CHECK(contains_point(c.post, SpherePoint::infinity(), 1e-9));

  CHECK(c.eps0 == doctest::Approx(0.5 * select_eps0(c)).epsilon(1e-12));
  CHECK(c.julia_diameter > 2.0 * c.eps0);
  double outer = 0.0;
  int most_hits = 0;
  for (cplx z : c.julia.points()) {
    outer = std::max(outer, std::abs(z) + 8.0 * c.eps0);
    int hits = 0;
    for (const auto& q : c.post) hits += q.is_finite() && std::abs(q.value() - z) <= 8.0 * c.eps0;
    most_hits = std::max(most_hits, hits);
  }
  CHECK(outer < 1.0);
  CHECK(most_hits <= 1);
  CHECK(c.delta0 > 0.0);
  CHECK(c.delta0 < c.eps0);
  double seed_gap = 0.0;
  for (cplx s : c.seeds) seed_gap = std::max(seed_gap, c.julia.distance(s));
  CHECK(seed_gap <= c.pixel);
}

TEST_CASE("normalization preconditions") {
  const ElevatorContext z2 = normalize(RationalMap::power(2), {256, 500, 64, 1});
  CHECK(z2.julia_radius < 0.5);
  // J is the circle of radius 1 / scale.
  double band = 0.0, seed_dev = 0.0;
  for (cplx z : z2.julia.points()) band = std::max(band, std::abs(std::abs(z) - 1.0 / z2.scale));
  for (cplx s : z2.seeds) seed_dev = std::max(seed_dev, std::abs(std::abs(s) - 1.0 / z2.scale));
  CHECK(band < 3.0 * z2.pixel);
  CHECK(seed_dev < 1e-9);

  CHECK_THROWS_AS(normalize(linear(2.0)), PreconditionError);
  // Lattes map: every critical orbit ends on a repelling cycle.
  const RationalMap lattes(Polynomial({1.0, 0.0, 2.0, 0.0, 1.0}), Polynomial({0.0, -4.0, 0.0, 4.0}));
  CHECK_THROWS_AS(normalize(lattes), Error);
}

TEST_CASE("elevation examples") {
  const ElevatorContext& c = example();
  const auto fixed = repelling_fixed_points(c.map);
  REQUIRE(!fixed.empty());
  const cplx p = fixed.front();
  CHECK(std::abs(c.map.eval_finite(p) - p) < 1e-12);

  const ElevatorResult e = elevate(c, p, 1e-4);
  CHECK(e.n > 0);
  CHECK(e.image_diameter >= c.delta0);
  CHECK(e.image_diameter <= 16.0 * c.eps0);
  CHECK(e.valid());
  CHECK(e.images.size() == kElevatorBoundary + 1 + kElevatorInterior);

  const ElevatorResult top = elevate(c, p, std::nextafter(c.eps0, 0.0));
  CHECK(top.n == 0);
  CHECK(top.valid());

  const ElevatorResult half = elevate(c, p, 0.5e-4);
  CHECK(half.n >= e.n);

  const ElevatorResult again = elevate(c, p, 1e-4);
  CHECK(again.n == e.n);
  CHECK(again.images == e.images);
  CHECK(again.center == e.center);

  CHECK_THROWS_AS(elevate(c, p, c.eps0), PreconditionError);
  CHECK_THROWS_AS(elevate(c, p, 0.0), PreconditionError);
  // 0 is the center of a Fatou component.
  CHECK_THROWS_AS(elevate(c, 0.0, 1e-4), PreconditionError);
}

TEST_CASE("sampled elevations satisfy the invariants") {
  const ElevatorContext& c = example();
  const auto disks = sample_disks(c, 40, 3);
  CHECK(disks == sample_disks(c, 40, 3));
  for (const auto& [p, r] : disks) {
    const ElevatorResult e = elevate(c, p, r);
    CHECK(e.inside_half);
    CHECK(e.degree_ok);
    CHECK(e.diameter_ok);
    const NestedCheck nc = nested_consistency(c, p, r);
    CHECK(nc.monotone);
    CHECK(nc.lands);
  }
}

TEST_CASE("postcritical adjustment on the Chebyshev map") {
  // z^2 - 2: the critical point 0 lies on J and maps to the fixed point 2.
  const ElevatorContext& c = chebyshev();
  const ElevatorResult e = elevate(c, 0.0, 1e-4);
  CHECK(e.adjusted);
  CHECK(e.radius == 8.0 * c.eps0);
  CHECK(std::abs(e.center - 2.0 / c.scale) < 1e-9);
  CHECK(e.k == 2);
  REQUIRE(e.branch_point.has_value());
  CHECK(std::abs(*e.branch_point) < 1e-8);
  CHECK(e.valid());

  const DistortionStats s = distortion_stats(c, 100, 1);
  CHECK(s.invalid == 0);
  CHECK(s.max_k <= c.N);
  CHECK(s.gamma >= 1.0 / static_cast<double>(c.N));
  REQUIRE(s.C3.has_value());
  CHECK(std::isfinite(*s.C3));
  CHECK(s.fold_pairs > 0);
  CHECK(s.q_in_post);
}

TEST_CASE("linear harness") {
  const ElevatorContext c = synthetic_context(linear(2.0), {0.0}, {0.0}, 0.1, 1e-3);
  CHECK(c.delta0 == doctest::Approx(0.1 / (1.5 * 2.2)));
  const ElevatorResult e = elevate(c, 0.0, 1e-3);
  // 2^n 1e-3 <= 0.1 < 2^(n+1) 1e-3
  CHECK(e.n == 6);
  CHECK(e.image_diameter == doctest::Approx(2.0 * 64e-3).epsilon(1e-12));

  const DistortionStats s = distortion_stats(c, 100, 7);
  CHECK(s.gamma == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.C1 * s.C2 ==
        doctest::Approx(s.max_image_diameter / s.min_image_diameter).epsilon(0.01));
  CHECK_FALSE(s.C3.has_value());
  CHECK(s.fold_pairs == 0);
  CHECK_FALSE(s.degenerate);
  CHECK(s.invalid == 0);

  DistortionOptions tiny;
  tiny.r_lo = tiny.r_hi = 1e-3;
  CHECK(distortion_stats(c, 20, 7, tiny).degenerate);

  const ElevatorContext slow = synthetic_context(linear(1.0 + 1e-4), {0.0}, {0.0}, 0.1, 1e-3);
  CHECK_THROWS_AS(elevate(slow, 0.0, 1e-12), Error);
}

TEST_CASE("example map distortion constants") {
  const ElevatorContext& c = example();
  const DistortionStats s = distortion_stats(c, 200, 1);
  CHECK(s.samples == 200);
  CHECK(s.invalid == 0);
  CHECK(std::isfinite(s.C1));
  CHECK(s.r1 > 0.0);
  CHECK(std::isfinite(s.C2));
  CHECK(s.gamma >= 1.0 / 64.0);
  CHECK(s.max_k <= 64);
  CHECK_FALSE(s.degenerate);
  // post(f) lies in the Fatou set, so no elevation is adjusted and (d) has no data.
  CHECK_FALSE(s.C3.has_value());

  const DistortionStats again = distortion_stats(c, 200, 1);
  CHECK(again.gamma == s.gamma);
  CHECK(again.C1 == s.C1);
  CHECK(again.C2 == s.C2);
}
