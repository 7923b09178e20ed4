#include "doctest.h"
#include "carpet/boettcher.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "unit/maps.hpp"

using namespace carpet;

namespace {

std::vector<SpherePoint> disk_samples(double rmin, double rmax, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SpherePoint> out;
  for (int i = 0; i < count; ++i)
    out.emplace_back(std::polar(rmin + (rmax - rmin) * u(rng), 2.0 * std::numbers::pi * u(rng)));
  return out;
}

std::vector<RotationSample> circle_samples(cplx a, int count) {
  std::vector<RotationSample> s;
  for (int j = 0; j < count; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / count);
    s.push_back({z, a * z});
  }
  return s;
}

}  // namespace

TEST_CASE("power map chart is the identity") {
  const auto samples = disk_samples(0.0, 0.95, 200, 1);
  const BoettcherChart c = boettcher_chart(RationalMap::power(2), 0.0, samples);
  CHECK(c.k == 2);
  CHECK(c.failed() == 0);
  for (const auto& r : c.rows) CHECK(std::abs(r.psi - r.z.value()) < 1e-12);

  const BoettcherChart cube = boettcher_chart(RationalMap::power(3), SpherePoint::infinity(),
                                              std::vector<SpherePoint>{SpherePoint(2.0)});
  CHECK(cube.k == 3);
  CHECK(std::abs(cube.rows[0].psi - 0.5) < 1e-12);
}

TEST_CASE("example map chart at infinity") {
  const RationalMap f = testmaps::carpet_map();
  const auto samples = disk_samples(1.2, 4.0, 200, 7);
  const BoettcherChart c = boettcher_chart(f, SpherePoint::infinity(), samples);
  CHECK(c.k == 2);
  CHECK(std::abs(c.scale - 1.0) < 1e-15);
  CHECK(c.failed() == 0);
  CHECK(c.max_residual() < 1e-6);
  for (const auto& r : c.rows) {
    CHECK(std::abs(r.psi) < 1.0);
    CHECK(r.confidence > 0.0);
  }
}

TEST_CASE("chart preconditions and failures") {
  const RationalMap q = testmaps::quadratic(0.1);
  CHECK_THROWS_AS(boettcher_chart(q, 0.0, std::vector<SpherePoint>{0.01}), PreconditionError);
  // A repelling fixed point of z^2.
  CHECK_THROWS_AS(Boettcher(RationalMap::power(2), 1.0), PreconditionError);
  const BoettcherChart c =
      boettcher_chart(RationalMap::power(2), 0.0, std::vector<SpherePoint>{1.5, 0.5});
  CHECK_FALSE(c.rows[0].ok);
  CHECK_FALSE(c.rows[0].error.empty());
  CHECK(c.rows[1].ok);
  CHECK(c.failed() == 1);
}

TEST_CASE("conjugacy residual") {
  const RationalMap f = testmaps::carpet_map();
  const Boettcher b(f, SpherePoint::infinity());
  std::vector<BoettcherRow> source, image;
  for (const auto& z : disk_samples(1.3, 3.0, 50, 3)) {
    source.push_back(b.evaluate(z));
    image.push_back(b.evaluate(f(z)));
  }
  CHECK(conjugacy_residual(f, image, source, 2) < 1e-6);
  CHECK(conjugacy_residual(f, image, source, 3) > 0.01);

  std::vector<BoettcherRow> short_image(image.begin(), image.end() - 1);
  CHECK_THROWS_AS(conjugacy_residual(f, short_image, source, 2), Error);
  CHECK_THROWS_AS(conjugacy_residual(f, source, source, 2), Error);

  std::vector<BoettcherRow> id_src(3), id_img(3);
  for (int i = 0; i < 3; ++i) {
    id_src[i].z = cplx(2.0 + i, 0.0);
    id_src[i].psi = cplx(0.1 * i, 0.2);
    id_src[i].ok = true;
    id_img[i] = id_src[i];
    id_img[i].z = f(id_src[i].z);
  }
  CHECK(conjugacy_residual(f, id_img, id_src, 1) == 0.0);
}

TEST_CASE("basepoints of the example map") {
  const RationalMap f = testmaps::carpet_map();
  const OrbitReport report = postcritical_report(f);
  RasterOptions o;
  o.window.half_width = 1.2;
  o.resolution = 512;
  const Scene scene = build_scene(f, report.attracting_cycles(), o);
  const auto records = fatou_records(f, scene, report);
  REQUIRE(!records.empty());

  auto record_at = [&](const SpherePoint& p) -> const FatouComponentRecord& {
    const int id = component_of(scene, p);
    REQUIRE(id >= 0);
    for (const auto& r : records)
      if (r.component == id) return r;
    FAIL("component not recorded");
    return records[0];
  };

  const auto& outer = record_at(SpherePoint::infinity());
  CHECK(outer.component == 0);
  CHECK(outer.level == 0);
  CHECK(outer.valid);
  CHECK(outer.basepoint.is_infinity());
  CHECK(outer.exponent == 2);

  const auto& center = record_at(0.0);
  CHECK(center.level == 1);
  CHECK(chordal_distance(center.basepoint, 0.0) < 1e-12);
  for (cplx p : {cplx(0, 0.5), cplx(0, -0.5)}) {
    const auto& r = record_at(p);
    // +-i/2 are critical values, not critical points.
    CHECK(r.level == 2);
    CHECK(chordal_distance(r.basepoint, p) < 1e-9);
    CHECK(r.exponent == 1);
  }

  int valid = 0;
  for (const auto& r : records) {
    if (!r.valid) continue;
    ++valid;
    const FatouComponentRecord* img = nullptr;
    for (const auto& s : records)
      if (s.component == r.image) img = &s;
    REQUIRE(img != nullptr);
    REQUIRE(img->valid);
    CHECK(chordal_distance(f(r.basepoint), img->basepoint) < 1e-8);
    const FatouComponentRecord* next = nullptr;
    for (const auto& s : records)
      if (s.component == img->image) next = &s;
    REQUIRE(next != nullptr);
    CHECK(static_cast<long long>(r.exponent) * img->exponent ==
          orbit_local_degree(f, report.critical, r.basepoint, 2));
  }
  CHECK(valid >= 100);
}

TEST_CASE("rotation solver verdicts") {
  const RotationResult neg = rotation_solve(circle_samples(-1.0, 1000), 3, 3, 1);
  CHECK(neg.compatible);
  CHECK(std::abs(neg.a + 1.0) < 1e-12);

  for (int k = 2; k <= 4; ++k)
    for (int n = 1; n <= 3; ++n) {
      const RotationResult id = rotation_solve(circle_samples(1.0, 500), k, n * k, n);
      CHECK(id.compatible);
      CHECK(std::abs(id.a - 1.0) < 1e-12);
    }

  const RotationResult iz = rotation_solve(circle_samples(cplx(0, 1), 1000), 2, 2, 1);
  CHECK_FALSE(iz.compatible);
  CHECK(iz.equation_residual > 1.0);
  CHECK(std::abs(iz.a - cplx(0, 1)) < 1e-12);

  const RotationResult deg = rotation_solve(circle_samples(1.0, 100), 2, 3, 1);
  CHECK_FALSE(deg.compatible);
  CHECK(deg.reason == "degree");
}

TEST_CASE("rotation solver recovers roots of unity exactly") {
  for (int k = 2; k <= 5; ++k)
    for (int n = 1; n <= 3; ++n) {
      const int order = n * (k - 1);
      for (int j = 0; j < order; ++j) {
        const cplx a = std::polar(1.0, 2.0 * std::numbers::pi * j / order);
        const RotationResult r = rotation_solve(circle_samples(a, 720), k, n * k, n);
        CHECK(r.compatible);
        CHECK(std::abs(r.a - a) < 1e-12);
      }
    }
}

TEST_CASE("rotation solver conjugation invariance and preconditions") {
  // phi(z) = a z conjugated by z -> w z stays a z.
  const cplx a = std::polar(1.0, 2.0 * std::numbers::pi / 3);
  const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3);
  std::vector<RotationSample> conj;
  for (const auto& s : circle_samples(a, 600)) conj.push_back({w * s.z, w * s.phi});
  const RotationResult x = rotation_solve(circle_samples(a, 600), 4, 4, 1);
  const RotationResult y = rotation_solve(conj, 4, 4, 1);
  CHECK(x.compatible == y.compatible);
  CHECK(std::abs(x.a - y.a) < 1e-12);

  std::vector<RotationSample> reflected;
  for (const auto& s : circle_samples(1.0, 50)) reflected.push_back({s.z, std::conj(s.z)});
  CHECK_THROWS_AS(rotation_solve(reflected, 2, 2, 1), PreconditionError);
  CHECK_THROWS_AS(rotation_solve(circle_samples(1.0, 50), 1, 1, 1), PreconditionError);
  CHECK_THROWS_AS(rotation_solve(circle_samples(1.0, 2), 2, 2, 1), PreconditionError);
}
