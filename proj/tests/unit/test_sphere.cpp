#include <random>

#include "doctest.h"
#include "carpet/sphere.hpp"
#include "unit/maps.hpp"

using namespace carpet;

namespace {

const SpherePoint inf = SpherePoint::infinity();

bool near(const SpherePoint& a, const SpherePoint& b, double tol) {
  return chordal_distance(a, b) < tol;
}

}  // namespace

TEST_CASE("chordal distance examples") {
  CHECK(chordal_distance(0.0, 0.0) == 0.0);
  CHECK(chordal_distance(0.0, inf) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(chordal_distance(1.0, -1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(chordal_distance(inf, inf) == 0.0);
  const cplx z(3.0, -4.0);
  CHECK(chordal_distance(z, inf) == doctest::Approx(2.0 / std::sqrt(26.0)));
}

TEST_CASE("chordal distance is bounded, symmetric, rotation invariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const SpherePoint z(g(rng), g(rng));
    const SpherePoint w(g(rng), g(rng));
    const double d = chordal_distance(z, w);
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
    CHECK(d == chordal_distance(w, z));
    // Unitary rotation: a, b with |a|^2 + |b|^2 = 1, c = -conj(b), d = conj(a).
    cplx a(g(rng), g(rng)), b(g(rng), g(rng));
    const double s = std::sqrt(std::norm(a) + std::norm(b));
    a /= s;
    b /= s;
    const MoebiusMap rot(a, b, -std::conj(b), std::conj(a));
    CHECK(std::abs(chordal_distance(rot(z), rot(w)) - d) < 1e-12);
  }
}

TEST_CASE("non-finite input collapses to infinity") {
  const SpherePoint p(cplx(std::numeric_limits<double>::infinity(), 0.0));
  CHECK(p.is_infinity());
  const SpherePoint q(cplx(std::nan(""), 1.0));
  CHECK(q.is_infinity());
}

TEST_CASE("polynomial basics") {
  const Polynomial p({1, 0, 3, 0, 0});
  CHECK(p.degree() == 2);
  CHECK(Polynomial().degree() == -1);
  CHECK(Polynomial().is_zero());
  CHECK(p(2.0) == cplx(13.0));
  CHECK(p.derivative()(2.0) == cplx(12.0));
  const Polynomial r = p.reversed(3);
  CHECK(r.degree() == 3);
  CHECK(r.coefficient(1) == cplx(3.0));
  CHECK(r.coefficient(3) == cplx(1.0));
  const Polynomial sq = Polynomial({1, 1}).pow(2);
  CHECK(sq.coefficient(1) == cplx(2.0));
}

TEST_CASE("example map evaluation") {
  const RationalMap f = testmaps::carpet_map();
  CHECK(f.degree() == 4);
  CHECK(near(f(cplx(0, 0.5)), 0.0, 1e-15));
  CHECK(f(0.0).is_infinity());
  CHECK(f(inf).is_infinity());
  CHECK(near(f(1.0), cplx(15.0 / 16.0), 1e-15));
}

TEST_CASE("evaluation agrees across charts") {
  const RationalMap f = testmaps::carpet_map();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    const cplx z(u(rng), u(rng));
    const cplx direct = (16.0 * std::pow(z, 4) - 1.0) / (16.0 * z * z);
    CHECK(chordal_distance(f(z), direct) < 1e-10);
  }
}

TEST_CASE("rational map validation") {
  CHECK_THROWS_AS(RationalMap(Polynomial({1, 1}), Polynomial()), PreconditionError);
  CHECK_THROWS_AS(RationalMap(Polynomial({2}), Polynomial({3})), PreconditionError);
  // (z - 1)(z + 1) / (z - 1) shares a root.
  CHECK_THROWS_AS(RationalMap(Polynomial({-1, 0, 1}), Polynomial({-1, 1})), PreconditionError);
}

TEST_CASE("critical points of the example map") {
  const RationalMap f = testmaps::carpet_map();
  const auto crit = critical_points(f);
  CHECK(crit.size() == 6);
  int total = 0;
  for (const auto& c : crit) {
    CHECK(c.local_degree == 2);
    total += c.local_degree - 1;
    if (c.point.is_finite() && std::abs(c.point.value()) > 1e-9) {
      const cplx z = c.point.value();
      CHECK(std::abs(16.0 * std::pow(z, 4) + 1.0) < 1e-12);
    }
  }
  CHECK(total == 2 * f.degree() - 2);
  CHECK(local_degree(crit, 0.0) == 2);
  CHECK(local_degree(crit, inf) == 2);
  CHECK(local_degree(crit, 1.0) == 1);
}

TEST_CASE("critical points of power maps") {
  for (int k = 2; k <= 5; ++k) {
    const auto crit = critical_points(RationalMap::power(k));
    REQUIRE(crit.size() == 2);
    for (const auto& c : crit) CHECK(c.local_degree == k);
    CHECK(local_degree(RationalMap::power(k), 0.0) == k);
    CHECK(local_degree(RationalMap::power(k), inf) == k);
  }
  CHECK(local_degree(RationalMap::power(2), 0.0) == 2);
}

TEST_CASE("degree-1 map has no dynamical critical set") {
  const RationalMap m(Polynomial({1, 2}), Polynomial({3, 1}));
  CHECK_THROWS_AS(critical_points(m), PreconditionError);
}

TEST_CASE("critical points correspond under conjugation") {
  const RationalMap f = testmaps::carpet_map();
  const MoebiusMap m(cplx(1.0, 0.3), cplx(0.2, 0.0), cplx(0.1, -0.4), cplx(1.0, 0.0));
  const RationalMap g = conjugate(f, m);
  const auto cf = critical_points(f);
  const auto cg = critical_points(g);
  REQUIRE(cf.size() == cg.size());
  for (const auto& c : cf) {
    const SpherePoint img = m(c.point);
    bool found = false;
    for (const auto& d : cg)
      if (chordal_distance(d.point, img) < 1e-8 && d.local_degree == c.local_degree) found = true;
    CHECK(found);
  }
}

TEST_CASE("composition and iteration") {
  const RationalMap f = testmaps::carpet_map();
  const RationalMap f2 = iterate(f, 2);
  CHECK(f2.degree() == 16);
  for (cplx z : {cplx(0.3, 0.7), cplx(-1.2, 0.1), cplx(0.01, 0.9)})
    CHECK(chordal_distance(f2(z), f(f(z))) < 1e-10);
}

TEST_CASE("moebius examples") {
  const MoebiusMap rot(cplx(0, 1), 0, 0, 1);
  CHECK(near(rot(1.0), cplx(0, 1), 1e-15));
  const MoebiusMap c = MoebiusMap::conjugation();
  const MoebiusMap cc = c * c;
  CHECK_FALSE(cc.orientation_reversing());
  CHECK(moebius_distance(cc, MoebiusMap::identity()) < 1e-15);
  const MoebiusMap inv4(0, 1, 4, 0);
  CHECK(near(inv4(cplx(0, 0.5)), cplx(0, -0.5), 1e-15));
  CHECK(inv4(0.0).is_infinity());
  CHECK(near(inv4(inf), 0.0, 1e-15));
  CHECK_THROWS(MoebiusMap(1, 2, 2, 4));
}

TEST_CASE("moebius group laws") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  auto random_map = [&](bool conj) {
    return MoebiusMap(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng)),
                      cplx(g(rng), g(rng)), conj);
  };
  for (int t = 0; t < 50; ++t) {
    const MoebiusMap a = random_map(t % 2 == 0), b = random_map(t % 3 == 0);
    const MoebiusMap c = random_map(false);
    const SpherePoint z(g(rng), g(rng));
    CHECK(chordal_distance((a * b)(z), a(b(z))) < 1e-10);
    CHECK(moebius_distance((a * b) * c, a * (b * c)) < 1e-10);
    CHECK(moebius_distance(a * a.inverse(), MoebiusMap::identity()) < 1e-10);
    CHECK((a * b).orientation_reversing() ==
          (a.orientation_reversing() != b.orientation_reversing()));
    const MoebiusMap n = a.normalized();
    CHECK(std::abs(n.determinant() - 1.0) < 1e-12);
    CHECK(moebius_distance(n, a) < 1e-12);
  }
}

TEST_CASE("moebius from triples and least squares fit") {
  const std::array<SpherePoint, 3> src{SpherePoint(0.0), SpherePoint(1.0), inf};
  const MoebiusMap target(cplx(0, 1), 0, 0, 1);
  const std::array<SpherePoint, 3> dst{target(src[0]), target(src[1]), target(src[2])};
  const MoebiusMap m = MoebiusMap::from_triples(src, dst, false);
  CHECK(moebius_distance(m, target) < 1e-12);

  const MoebiusMap rev(0, 1, 4, 0, true);
  std::vector<SpherePoint> s, d;
  for (int i = 0; i < 12; ++i) {
    const SpherePoint p(std::polar(0.3 + 0.05 * i, 0.7 * i));
    s.push_back(p);
    d.push_back(rev(p));
  }
  const MoebiusMap fit = fit_moebius(s, d, true);
  CHECK(moebius_distance(fit, rev) < 1e-10);
  CHECK(std::isinf(moebius_distance(fit, MoebiusMap(0, 1, 4, 0, false))));
}

TEST_CASE("example map symmetries hold at the coefficient level") {
  const RationalMap f = testmaps::carpet_map();
  for (cplx z : {cplx(0.31, 0.72), cplx(-0.4, 0.05), cplx(1.3, -0.2)}) {
    CHECK(chordal_distance(f(cplx(0, 1) * z), -f(z).value()) < 1e-13);
    CHECK(chordal_distance(f(1.0 / (4.0 * z)), -f(z).value()) < 1e-13);
    CHECK(chordal_distance(f(std::conj(z)), std::conj(f(z).value())) < 1e-13);
  }
}
