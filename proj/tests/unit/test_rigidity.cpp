#include "doctest.h"
#include "carpet/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unit/maps.hpp"

using namespace carpet;

namespace {

// exact closure of <iz, conj z, 1/(4z)> (tests/oracles/group_order.py)
constexpr int kExampleGroupOrder = 16;

struct Fixture {
  RationalMap f = testmaps::carpet_map();
  OrbitReport report = postcritical_report(f);
  Scene scene;
  JuliaSamples samples;
  SymmetryReport symmetries;

  explicit Fixture(int resolution) {
    RasterOptions o;
    o.window.half_width = 1.2;
    o.resolution = resolution;
    scene = build_scene(f, report.attracting_cycles(), o);
    samples = julia_samples(scene.grid, f);
    symmetries = detect_symmetries(f, scene, report);
  }
};

const Fixture& at512() {
  static const Fixture fx(512);
  return fx;
}

const Fixture& at1024() {
  static const Fixture fx(1024);
  return fx;
}

const MoebiusMap kRotate(cplx(0, 1), 0, 0, 1);
const MoebiusMap kInvert(0, 1, 4, 0);

double closest(const std::vector<MoebiusMap>& set, const MoebiusMap& m) {
  double best = INFINITY;
  for (const auto& x : set) best = std::min(best, moebius_distance(x, m));
  return best;
}

JuliaSamples circle(int n) {
  std::vector<cplx> pts;
  for (int k = 0; k < n; ++k) pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / n));
  return julia_samples(std::move(pts), 2.0 * std::numbers::pi / n, n);
}

}  // namespace

TEST_CASE("candidate enumeration") {
  const std::vector<SpherePoint> three = {SpherePoint(0.0), SpherePoint(1.0), SpherePoint::infinity()};
  const auto c = candidate_symmetries(std::span<const SpherePoint>(three));
  // 3! orderings, both orientations
  CHECK(c.size() == 12);
  CHECK(closest(c, MoebiusMap::identity()) < 1e-12);
  CHECK(closest(c, MoebiusMap::conjugation()) < 1e-12);
  CHECK(closest(c, MoebiusMap(0, 1, 1, 0)) < 1e-12);

  const std::vector<SpherePoint> repeated = {SpherePoint(0.0), SpherePoint(0.0), SpherePoint(1.0)};
  CHECK(candidate_symmetries(std::span<const SpherePoint>(repeated)).empty());

  const auto curves = trace_all(at512().scene);
  CHECK(candidate_symmetries(curves, 3).size() <= 12);
  CHECK_THROWS_AS(candidate_symmetries(std::span(curves).first(2), 3), PreconditionError);

  // Centroids are not equivariant under 1/(4z); basepoints are.
  const auto by_centroid = candidate_symmetries(curves, 6);
  CHECK(closest(by_centroid, kRotate) < 1e-3);
  CHECK(closest(by_centroid, MoebiusMap::conjugation()) < 1e-3);
  CHECK(closest(by_centroid, kInvert) > 1e-3);
  const auto& L = at512().symmetries.landmarks;
  REQUIRE(L.size() == 6);
  const auto by_basepoint = candidate_symmetries(std::span<const SpherePoint>(L));
  CHECK(closest(by_basepoint, kRotate) < 1e-3);
  CHECK(closest(by_basepoint, MoebiusMap::conjugation()) < 1e-3);
  CHECK(closest(by_basepoint, kInvert) < 1e-3);
}

TEST_CASE("invariance scores") {
  const Fixture& fx = at512();
  CHECK(fx.samples.probes.size() == 4000);
  CHECK(fx.samples.cloud.size() >= 1000);
  const InvarianceScore id = verify_invariance(MoebiusMap::identity(), fx.samples);
  CHECK(id.accepted);
  CHECK(id.score < 1e-9);
  CHECK(verify_invariance(kRotate, fx.samples).score <= std::sqrt(0.5) + 1e-9);
  CHECK(verify_invariance(kRotate, fx.samples).accepted);
  CHECK(verify_invariance(kInvert, fx.samples).accepted);
  CHECK(verify_invariance(MoebiusMap::conjugation(), fx.samples).accepted);
  const InvarianceScore shift = verify_invariance(MoebiusMap(1, 0.3, 0, 1), fx.samples);
  CHECK_FALSE(shift.accepted);
  CHECK(shift.score > 10.0);

  const MoebiusMap odd(cplx(1.0, 0.2), 0.05, 0.1, 1.0);
  CHECK(verify_invariance(odd, fx.samples).score ==
        verify_invariance(odd.inverse(), fx.samples).score);
}

TEST_CASE("symmetry group of the example map") {
  const Fixture& fx = at512();
  const SymmetryGroup& g = fx.symmetries.group;
  CHECK(g.closed);
  CHECK(g.verdict == "closed");
  CHECK(g.order == kExampleGroupOrder);
  CHECK(closest(g.elements, kRotate) < 1e-3);
  CHECK(closest(g.elements, MoebiusMap::conjugation()) < 1e-3);
  CHECK(closest(g.elements, kInvert) < 1e-3);
  CHECK(g.delta0 > 0.0);
  for (const auto& row : g.table)
    for (int k : row) CHECK(k >= 0);
  for (const auto& r : fx.symmetries.refined) CHECK(r.exact);
  CHECK(!fx.symmetries.caveat.empty());
}

TEST_CASE("closure controls") {
  const JuliaSamples s = circle(2000);
  const SymmetryGroup trivial = group_closure({}, s);
  CHECK(trivial.order == 1);
  CHECK(trivial.closed);
  CHECK(trivial.delta0 == 0.0);

  const MoebiusMap irrational(std::polar(1.0, 1.0), 0, 0, 1);
  const SymmetryGroup runaway = group_closure(std::vector{irrational}, s, 32);
  CHECK_FALSE(runaway.closed);
  CHECK(runaway.verdict == "closure not reached");
  CHECK(runaway.order == 32);

  const MoebiusMap quarter(cplx(0, 1), 0, 0, 1);
  const SymmetryGroup c4 = group_closure(std::vector{quarter}, s);
  CHECK(c4.order == 4);
  CHECK(c4.delta0 == doctest::Approx(std::sqrt(2.0)));

  // z -> 2z is not a symmetry of the circle.
  const SymmetryGroup bad = group_closure(std::vector{MoebiusMap(2, 0, 0, 1)}, s);
  CHECK(bad.verdict == "product rejected");
}

TEST_CASE("functional equation search") {
  const Fixture& fx = at512();
  const FunctionalSearch id =
      functional_equation_search(fx.f, fx.f, MoebiusMap::identity(), fx.samples, fx.samples, 4);
  CHECK(id.precheck);
  CHECK(id.relations.size() == 6);
  for (const auto& r : id.relations) CHECK(r.m_prime == r.m + r.n);
  REQUIRE(id.reduced_l.has_value());
  CHECK(*id.reduced_l == 1);

  // f(iz) = -f(z) and f is even
  const FunctionalSearch rot =
      functional_equation_search(fx.f, fx.f, kRotate, fx.samples, fx.samples, 4);
  REQUIRE(rot.relations.size() == 3);
  CHECK(rot.relations[0].m_prime == 3);
  CHECK(rot.relations[0].m == 2);
  CHECK(rot.relations[0].n == 1);
  CHECK(rot.relations[1].m_prime == 4);
  CHECK(rot.relations[1].m == 2);
  CHECK(rot.relations[1].n == 2);
  CHECK(rot.relations[2].m_prime == 4);
  CHECK(rot.relations[2].m == 3);
  CHECK(rot.relations[2].n == 1);
  REQUIRE(rot.reduced_l.has_value());
  CHECK(*rot.reduced_l == 2);
  // (3, 2, 1) and (4, 3, 1) chain to (4, 2, 2).
  for (const auto& a : rot.relations)
    for (const auto& b : rot.relations) {
      if (a.m_prime != b.m || a.m_prime + b.m_prime - b.m > 4) continue;
      const int mp = b.m_prime, m = a.m, n = a.n + b.n;
      CHECK(std::any_of(rot.relations.begin(), rot.relations.end(), [&](const auto& c) {
        return c.m_prime == mp && c.m == m && c.n == n;
      }));
    }
  for (const auto& r : rot.relations) CHECK(r.degree_identity);

  const FunctionalSearch shift = functional_equation_search(
      fx.f, fx.f, MoebiusMap(1, 0.3, 0, 1), fx.samples, fx.samples, 4);
  CHECK_FALSE(shift.precheck);
  CHECK(shift.relations.empty());
  CHECK_FALSE(shift.reduced_l.has_value());

  CHECK_THROWS_AS(
      functional_equation_search(fx.f, fx.f, kRotate, fx.samples, fx.samples, 7),
      PreconditionError);
}

TEST_CASE("verdict is stable under resolution") {
  const Fixture& lo = at512();
  const Fixture& hi = at1024();
  CHECK(hi.symmetries.group.order == lo.symmetries.group.order);
  CHECK(hi.symmetries.group.closed);
  CHECK(closest(hi.symmetries.group.elements, kInvert) < 1e-3);

  const auto cands = candidate_symmetries(std::span<const SpherePoint>(lo.symmetries.landmarks));
  const JuliaSamples a = julia_samples(lo.scene.grid, lo.f, 400);
  const JuliaSamples b = julia_samples(hi.scene.grid, hi.f, 400);
  int differing = 0, boundary = 0;
  for (const auto& c : cands) {
    const InvarianceScore sa = verify_invariance(c, a), sb = verify_invariance(c, b);
    if (sa.score >= 1.0 && sa.score <= 4.0) {
      ++boundary;
      continue;
    }
    differing += sa.accepted != sb.accepted;
  }
  CHECK(differing == 0);
  MESSAGE("boundary candidates: " << boundary << " of " << cands.size());
}
