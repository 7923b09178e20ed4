#include "doctest.h"
#include "carpet/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "unit/maps.hpp"

using namespace carpet;

namespace {

std::vector<CycleInfo> attracting(const RationalMap& f) {
  return postcritical_report(f).attracting_cycles();
}

RasterOptions options(double hw, int n, int max_iter = 500) {
  RasterOptions o;
  o.window.half_width = hw;
  o.resolution = n;
  o.max_iter = max_iter;
  return o;
}

// Vertex-wise symmetric Hausdorff distance in the plane.
double hausdorff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto one = [](const std::vector<cplx>& p, const std::vector<cplx>& q) {
    double worst = 0.0;
    for (cplx u : p) {
      double best = INFINITY;
      for (cplx v : q) best = std::min(best, std::abs(u - v));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

}  // namespace

TEST_CASE("z^2 basins and julia annulus") {
  const RationalMap f = RationalMap::power(2);
  const RasterGrid g = rasterize(f, postcritical_report(f), options(2.0, 256));
  std::set<std::int32_t> labels(g.label.begin(), g.label.end());
  labels.erase(kUnresolved);
  CHECK(labels == std::set<std::int32_t>{0, 1});
  const int n = g.resolution();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.julia[g.index(i, j)])
        CHECK(std::abs(std::abs(g.pixel_center(i, j)) - 1.0) < 2.5 * g.pixel_size());
  // Thickness of the annulus along the positive real axis. The circle runs
  // along a pixel edge here, so two pixels are unresolved and their labeled
  // neighbors are flagged as well.
  int thick = 0;
  for (int i = n / 2; i < n; ++i) thick += g.julia[g.index(i, n / 2)];
  CHECK(thick >= 1);
  CHECK(thick <= 4);
  const double width = g.julia_count() * g.pixel_size() / (2.0 * std::numbers::pi);
  CHECK(width <= 4.0);

  const Components c = label_components(g);
  CHECK(c.list.size() == 2);
}

TEST_CASE("raster edge cases") {
  const RationalMap f = RationalMap::power(2);
  const RasterGrid g = rasterize(f, attracting(f), options(2.0, 32, 0));
  CHECK(g.unresolved_count() == 32 * 32);
  CHECK(g.julia_count() == 32 * 32);

  CHECK_THROWS_AS(rasterize(f, std::vector<CycleInfo>{}, options(2.0, 8)), Error);
  CHECK_THROWS_AS(rasterize(f, attracting(f), options(2.0, 0)), PreconditionError);

  RasterGrid one(Window{}, 16);
  std::fill(one.label.begin(), one.label.end(), 0);
  const Components c = label_components(one);
  REQUIRE(c.list.size() == 1);
  CHECK(c.list[0].pixels == 256);
  CHECK(c.list[0].touches_edge);
}

TEST_CASE("serial and parallel rasters agree bitwise") {
  const RationalMap f = testmaps::carpet_map();
  const auto cyc = attracting(f);
  const RasterGrid a = rasterize(f, cyc, options(1.2, 96));
  const RasterGrid b = rasterize_serial(f, cyc, options(1.2, 96));
  CHECK(a.label == b.label);
  CHECK(a.iterations == b.iterations);
  CHECK(a.julia == b.julia);
}

TEST_CASE("component ordering") {
  RasterGrid g(Window{}, 8);
  std::fill(g.julia.begin(), g.julia.end(), std::uint8_t{1});
  auto open = [&](int i, int j) {
    g.julia[g.index(i, j)] = 0;
    g.label[g.index(i, j)] = 0;
  };
  open(5, 1);
  open(1, 1);
  open(1, 2);
  open(3, 5);
  const Components c = label_components(g);
  REQUIRE(c.list.size() == 3);
  CHECK(c.list[0].pixels == 2);
  CHECK(c.list[1].first == static_cast<long>(g.index(5, 1)));
  CHECK(c.list[2].first == static_cast<long>(g.index(3, 5)));
  CHECK(c.map[g.index(1, 2)] == 0);
  CHECK(c.map[g.index(0, 0)] == -1);
}

TEST_CASE("smallest admissible component") {
  RasterGrid g(Window{}, 8);
  std::fill(g.julia.begin(), g.julia.end(), std::uint8_t{1});
  for (int j = 3; j <= 4; ++j)
    for (int i = 3; i <= 4; ++i) {
      g.julia[g.index(i, j)] = 0;
      g.label[g.index(i, j)] = 0;
    }
  const Components c = label_components(g);
  const PeripheralCurve k = trace_in_grid(g, c, 0);
  CHECK(k.vertices.size() == 8);
  CHECK(is_simple(k.vertices));
  CHECK(winding_number(k.vertices, g.pixel_center(3, 3)) == 1);

  RasterGrid h(Window{}, 8);
  std::fill(h.julia.begin(), h.julia.end(), std::uint8_t{1});
  h.julia[h.index(2, 2)] = 0;
  const Components d = label_components(h);
  CHECK_THROWS_AS(trace_in_grid(h, d, 0), PreconditionError);
}

TEST_CASE("z^2 peripheral curves") {
  const RationalMap f = RationalMap::power(2);
  const Scene s = build_scene(f, attracting(f), options(2.0, 256));
  const auto curves = trace_all(s);
  REQUIRE(curves.size() == 2);
  const double px = s.grid.pixel_size();
  for (const auto& k : curves) {
    CHECK(k.diameter == doctest::Approx(2.0).epsilon(0.02));
    CHECK(is_simple(k.vertices));
    double dev = 0.0;
    for (cplx z : k.vertices) dev = std::max(dev, std::abs(std::abs(z) - 1.0));
    CHECK(dev < 3.0 * px);
  }
  CHECK(curves[0].traced_inverted != curves[1].traced_inverted);

  const CarpetEvidence ev = carpet_evidence(s, curves);
  CHECK(ev.components == 2);
  CHECK_FALSE(ev.consistent);
}

TEST_CASE("example map raster") {
  const RationalMap f = testmaps::carpet_map();
  const auto cyc = attracting(f);
  REQUIRE(cyc.size() == 1);
  const Scene s = build_scene(f, cyc, options(1.2, 512));
  const RasterGrid& g = s.grid;
  const int n = g.resolution();

  SUBCASE("single basin") {
    std::set<std::int32_t> labels(g.label.begin(), g.label.end());
    labels.erase(kUnresolved);
    CHECK(labels == std::set<std::int32_t>{0});
  }

  SUBCASE("forward consistency") {
    // Exceptions are images landing in the julia band; almost all of them
    // sit next to a pixel of the same basin.
    long labeled = 0, consistent = 0, interior_misses = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const auto lab = g.label[g.index(i, j)];
        if (lab == kUnresolved) continue;
        ++labeled;
        int x, y;
        const SpherePoint w = f(g.pixel_point(i, j));
        // Images leaving the window are in the basin of infinity.
        if (!g.locate(w, x, y) || g.label[g.index(x, y)] == lab) {
          ++consistent;
          continue;
        }
        bool near = false;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int a = x + dx, b = y + dy;
            if (a >= 0 && b >= 0 && a < n && b < n && g.label[g.index(a, b)] == lab) near = true;
          }
        interior_misses += !near;
      }
    CHECK(static_cast<double>(consistent) >= 0.97 * static_cast<double>(labeled));
    CHECK(static_cast<double>(interior_misses) <= 0.005 * static_cast<double>(labeled));
  }

  SUBCASE("components and curves") {
    const auto curves = trace_all(s);
    CHECK(s.comps.list.size() >= 10);
    int unbounded = 0;
    for (const auto& c : s.comps.list) unbounded += c.touches_edge;
    CHECK(unbounded == 1);

    for (const auto& k : curves) {
      const Component& c = s.comps.list[k.component];
      if (c.touches_edge) continue;
      // Any pixel of the component whose 4-neighbors are in the component too.
      for (long p = c.first; p < static_cast<long>(g.label.size()); ++p) {
        const int i = static_cast<int>(p % n), j = static_cast<int>(p / n);
        if (s.comps.map[p] != k.component || i == 0 || i == n - 1 || j == n - 1) continue;
        if (s.comps.map[g.index(i + 1, j)] != k.component) continue;
        CHECK(std::abs(winding_number(k.vertices, g.pixel_center(i, j))) == 1);
        break;
      }
    }

    const CarpetEvidence ev = carpet_evidence(s, curves);
    CHECK(ev.unbounded == 1);
    CHECK(ev.all_simple);
    CHECK(ev.pairwise_disjoint);
    CHECK(ev.consistent);

    auto curve_at = [&](cplx z) -> const PeripheralCurve* {
      int i, j;
      REQUIRE(g.locate(SpherePoint(z), i, j));
      for (const auto& k : curves)
        if (k.component == s.comps.map[g.index(i, j)]) return &k;
      return nullptr;
    };
    auto rotate = [](const PeripheralCurve& k) {
      std::vector<cplx> r;
      for (cplx z : k.vertices) r.push_back(cplx(0, 1) * z);
      return r;
    };
    // The component of 0 is the largest bounded one and is mapped to itself;
    // the component of i/2 goes to the one of -1/2.
    const PeripheralCurve* center = curve_at(0.0);
    REQUIRE(center != nullptr);
    CHECK(center->component == 1);
    CHECK(hausdorff(rotate(*center), center->vertices) <= 2.0 * g.pixel_size());
    const PeripheralCurve* up = curve_at(cplx(0, 0.5));
    const PeripheralCurve* left = curve_at(cplx(-0.5, 0));
    REQUIRE(up != nullptr);
    REQUIRE(left != nullptr);
    CHECK(up != left);
    CHECK(hausdorff(rotate(*up), left->vertices) <= 2.0 * g.pixel_size());
  }
}

TEST_CASE("resolution scaling of the example map") {
  const RationalMap f = testmaps::carpet_map();
  const auto cyc = attracting(f);
  const Scene a = build_scene(f, cyc, options(1.2, 256));
  const Scene b = build_scene(f, cyc, options(1.2, 512));
  CHECK(static_cast<double>(b.grid.julia_count()) < 4.0 * static_cast<double>(a.grid.julia_count()));

  const auto ca = trace_all(a);
  const auto cb = trace_all(b);
  auto above = [](const std::vector<PeripheralCurve>& cs, double t) {
    return std::count_if(cs.begin(), cs.end(), [t](const auto& k) { return k.diameter > t; });
  };
  // Thresholds sit between clusters of equal diameters (the four-fold symmetry
  // makes them come in groups); curves shrink by about a pixel per side at
  // coarser resolution.
  for (double t : {0.2, 0.3, 0.45, 0.75})
    CHECK(above(ca, t) == above(cb, t));
}
