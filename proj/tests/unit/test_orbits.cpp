#include "doctest.h"
#include "carpet/orbits.hpp"
#include "unit/maps.hpp"

using namespace carpet;

namespace {

const SpherePoint inf = SpherePoint::infinity();

bool has(const std::vector<SpherePoint>& set, const SpherePoint& p, double tol = 1e-9) {
  return contains_point(set, p, tol);
}

}  // namespace

TEST_CASE("orbit tails of the example map") {
  const RationalMap f = testmaps::carpet_map();
  const OrbitTail a = orbit_tail(f, cplx(0, 0.5), 10000, 1e-9);
  CHECK(a.kind == OrbitTail::Kind::Finite);
  CHECK(a.preperiod == 2);
  CHECK(a.period == 1);
  REQUIRE(a.cycle.size() == 1);
  CHECK(a.cycle[0].is_infinity());

  const OrbitTail b = orbit_tail(f, inf, 10000, 1e-9);
  CHECK(b.kind == OrbitTail::Kind::Finite);
  CHECK(b.preperiod == 0);
  CHECK(b.period == 1);
}

TEST_CASE("budget exhaustion on a Julia point") {
  // 1 lies on the unit circle, the Julia set of z^2; irrational angle keeps it aperiodic.
  const OrbitTail t = orbit_tail(RationalMap::power(2), std::polar(1.0, 1.0), 20, 1e-9);
  CHECK(t.kind == OrbitTail::Kind::Unresolved);
  CHECK_THROWS_AS(orbit_tail(RationalMap::power(2), 0.5, 0, 1e-9), PreconditionError);
  CHECK_THROWS_AS(orbit_tail(RationalMap::power(2), 0.5, 5, 0.0), PreconditionError);
}

TEST_CASE("attracted versus finite") {
  const OrbitTail t = orbit_tail(RationalMap::power(2), 0.5, 10000, 1e-9);
  CHECK(t.kind == OrbitTail::Kind::Attracted);
  CHECK(t.period == 1);
  CHECK(chordal_distance(t.cycle[0], 0.0) < 1e-12);
}

TEST_CASE("postcritical report of the example map") {
  const RationalMap f = testmaps::carpet_map();
  const OrbitReport r = postcritical_report(f);
  CHECK(r.is_pcf);
  CHECK(r.is_subhyperbolic);
  CHECK(r.is_hyperbolic);
  CHECK(r.post_finite);
  CHECK(r.post.size() == 4);
  CHECK(has(r.post, cplx(0, 0.5)));
  CHECK(has(r.post, cplx(0, -0.5)));
  CHECK(has(r.post, 0.0));
  CHECK(has(r.post, inf));
  REQUIRE(r.post_c.size() == 1);
  CHECK(r.post_c[0].is_infinity());
  REQUIRE(r.cycles.size() == 1);
  CHECK(r.cycles[0].cls == CycleClass::Superattracting);
  CHECK(r.degree_bound == 64);
  CHECK_FALSE(r.offending_critical.has_value());
}

TEST_CASE("postcritical reports of quadratic polynomials") {
  const OrbitReport sq = postcritical_report(RationalMap::power(2));
  CHECK(sq.is_pcf);
  CHECK(sq.post.size() == 2);
  CHECK(has(sq.post, 0.0));
  CHECK(has(sq.post, inf));

  const OrbitReport basilica = postcritical_report(testmaps::quadratic(-1.0));
  CHECK(basilica.is_pcf);
  CHECK(basilica.is_hyperbolic);
  CHECK(basilica.post.size() == 3);
  CHECK(has(basilica.post, 0.0));
  CHECK(has(basilica.post, -1.0));
  CHECK(has(basilica.post, inf));

  // z^2 - 2: 0 -> -2 -> 2 -> 2, a repelling fixed point, so subhyperbolic only.
  const OrbitReport cheb = postcritical_report(testmaps::quadratic(-2.0));
  CHECK(cheb.is_pcf);
  CHECK(cheb.is_subhyperbolic);
  CHECK_FALSE(cheb.is_hyperbolic);

  // z^2 + 0.1: critical orbit converges to an attracting fixed point.
  const OrbitReport hyp = postcritical_report(testmaps::quadratic(0.1));
  CHECK_FALSE(hyp.is_pcf);
  CHECK(hyp.is_subhyperbolic);
  CHECK(hyp.is_hyperbolic);
}

TEST_CASE("report invariants") {
  for (const RationalMap& f :
       {testmaps::carpet_map(), RationalMap::power(3), testmaps::quadratic(-1.0),
        testmaps::quadratic(-2.0), testmaps::quadratic(0.1)}) {
    const OrbitReport r = postcritical_report(f);
    for (const auto& p : r.post_c) CHECK(has(r.post, p));
    if (r.is_hyperbolic) CHECK(r.is_subhyperbolic);
    if (r.is_pcf) CHECK(r.is_subhyperbolic);
    CHECK(r.degree_bound == degree_bound_N(r.critical));
    if (r.post_finite)
      for (const auto& p : r.post) CHECK(has(r.post, f(p), 1e-8));
  }
}

TEST_CASE("degree-1 map is rejected") {
  const RationalMap m(Polynomial({1, 2}), Polynomial({3, 1}));
  CHECK_THROWS_AS(postcritical_report(m), PreconditionError);
}

TEST_CASE("post(f) equals post(f^n)") {
  const RationalMap f = testmaps::carpet_map();
  const OrbitReport r1 = postcritical_report(f);
  for (int n = 2; n <= 3; ++n) {
    const OrbitReport rn = postcritical_report(iterate(f, n));
    CHECK(rn.is_pcf);
    CHECK(rn.post.size() == r1.post.size());
    for (const auto& p : r1.post) CHECK(has(rn.post, p, 1e-8));
  }
  const RationalMap b = testmaps::quadratic(-1.0);
  const OrbitReport b1 = postcritical_report(b);
  const OrbitReport b2 = postcritical_report(iterate(b, 2));
  CHECK(b2.post.size() == b1.post.size());
  for (const auto& p : b1.post) CHECK(has(b2.post, p, 1e-8));
}

TEST_CASE("cycle classification") {
  const RationalMap f = testmaps::carpet_map();
  const std::vector<SpherePoint> at_inf{inf};
  const CycleInfo c = classify_cycle(f, at_inf);
  CHECK(c.cls == CycleClass::Superattracting);
  CHECK(c.period == 1);

  const std::vector<SpherePoint> zero{SpherePoint(0.0)};
  CHECK(classify_cycle(RationalMap::power(2), zero).cls == CycleClass::Superattracting);

  const std::vector<SpherePoint> one{SpherePoint(1.0)};
  const CycleInfo r = classify_cycle(RationalMap::power(2), one);
  CHECK(r.cls == CycleClass::Repelling);
  CHECK(r.multiplier == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<SpherePoint> two_cycle{SpherePoint(0.0), SpherePoint(-1.0)};
  CHECK(classify_cycle(testmaps::quadratic(-1.0), two_cycle).cls ==
        CycleClass::Superattracting);

  const std::vector<SpherePoint> bogus{SpherePoint(0.5)};
  CHECK_THROWS_AS(classify_cycle(RationalMap::power(2), bogus), PreconditionError);
}

TEST_CASE("orbit local degree") {
  const RationalMap sq = RationalMap::power(2);
  CHECK(orbit_local_degree(sq, 0.0, 3) == 8);
  const RationalMap f = testmaps::carpet_map();
  CHECK(orbit_local_degree(f, 1.0, 5) == 1);
  CHECK(orbit_local_degree(f, cplx(0, 0.5), 2) == 2);
  CHECK(orbit_local_degree(f, cplx(0, 0.5), 3) == 4);
  CHECK(orbit_local_degree(f, 0.0, 2) == 4);
  CHECK(degree_bound_N(sq) == 4);
  CHECK(degree_bound_N(f) == 64);
  CHECK(degree_bound_N(RationalMap::power(3)) == 9);
}

TEST_CASE("orbit local degree is multiplicative along the orbit") {
  const RationalMap f = testmaps::carpet_map();
  const auto crit = critical_points(f);
  for (const auto& q : crit) {
    SpherePoint fa = q.point;
    for (int a = 1; a <= 3; ++a) {
      fa = f(fa);
      for (int b = 1; b <= 3; ++b)
        CHECK(orbit_local_degree(f, crit, q.point, a + b) ==
              orbit_local_degree(f, crit, q.point, a) * orbit_local_degree(f, crit, fa, b));
    }
  }
}
