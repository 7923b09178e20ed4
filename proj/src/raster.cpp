#include "carpet/raster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "carpet/parallel.hpp"

namespace carpet {

RasterGrid::RasterGrid(Window window, int resolution)
    : window_(window), n_(resolution) {
  if (resolution < 1) throw PreconditionError("raster: resolution must be positive");
  if (!(window.half_width > 0.0)) throw PreconditionError("raster: half-width must be positive");
  px_ = 2.0 * window.half_width / resolution;
  const size_t total = static_cast<size_t>(n_) * n_;
  label.assign(total, kUnresolved);
  iterations.assign(total, 0);
  julia.assign(total, 0);
}

cplx RasterGrid::pixel_center(int i, int j) const {
  return {window_.center.real() - window_.half_width + (i + 0.5) * px_,
          window_.center.imag() + window_.half_width - (j + 0.5) * px_};
}

SpherePoint RasterGrid::from_chart(cplx u) const {
  if (!window_.inverted) return SpherePoint(u);
  if (u == cplx{}) return SpherePoint::infinity();
  return SpherePoint(1.0 / u);
}

cplx RasterGrid::chart_coordinate(const SpherePoint& p) const {
  if (!window_.inverted) return p.is_infinity() ? cplx(INFINITY, INFINITY) : p.value();
  if (p.is_infinity()) return {};
  if (p.value() == cplx{}) return {INFINITY, INFINITY};
  return 1.0 / p.value();
}

SpherePoint RasterGrid::pixel_point(int i, int j) const { return from_chart(pixel_center(i, j)); }

double RasterGrid::chordal_half_pixel(int i, int j) const {
  // Half diagonal times the chordal density 2 / (1 + |u|^2), valid in either chart.
  const cplx u = pixel_center(i, j);
  return px_ * std::sqrt(2.0) / (1.0 + std::norm(u));
}

bool RasterGrid::locate(const SpherePoint& p, int& i, int& j) const {
  const cplx u = chart_coordinate(p);
  if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) return false;
  const double x = (u.real() - (window_.center.real() - window_.half_width)) / px_;
  const double y = ((window_.center.imag() + window_.half_width) - u.imag()) / px_;
  if (x < 0.0 || y < 0.0 || x >= n_ || y >= n_) return false;
  i = std::min(static_cast<int>(x), n_ - 1);
  j = std::min(static_cast<int>(y), n_ - 1);
  return true;
}

long RasterGrid::julia_count() const {
  return std::count(julia.begin(), julia.end(), std::uint8_t{1});
}

long RasterGrid::unresolved_count() const {
  return std::count(label.begin(), label.end(), kUnresolved);
}

double default_capture_radius(std::span<const CycleInfo> cycles) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < cycles.size(); ++a)
    for (size_t b = a + 1; b < cycles.size(); ++b)
      for (const auto& p : cycles[a].points)
        for (const auto& q : cycles[b].points) best = std::min(best, chordal_distance(p, q));
  if (!std::isfinite(best)) return 0.1;
  return std::max(1e-3, 0.5 * best);
}

namespace {

// Bound on the linearized pixel image along the orbit. Past it the first-order
// estimate at capture says nothing (pixels straddling thin J escape this way).
constexpr double kMaxLinearImage = 1.0;

struct PixelResult {
  std::int32_t label;
  std::int32_t iterations;
};

PixelResult classify_pixel(const RationalMap& f, std::span<const CycleInfo> cycles,
                           const RasterGrid& g, int i, int j, int max_iter, double radius) {
  SpherePoint z = g.pixel_point(i, j);
  const double rho = g.chordal_half_pixel(i, j);
  double stretch = 1.0, widest = rho;
  for (int t = 0; t < max_iter; ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t which = kUnresolved;
    for (size_t c = 0; c < cycles.size(); ++c)
      for (const auto& q : cycles[c].points) {
        const double d = chordal_distance(z, q);
        if (d < best) {
          best = d;
          which = static_cast<std::int32_t>(c);
        }
      }
    if (best < 0.5 * radius) {
      if (best + stretch * rho <= radius && widest <= kMaxLinearImage) return {which, t};
      return {kUnresolved, t};
    }
    const ChartJet jet = f.jet(z);
    stretch *= jet.spherical_derivative;
    widest = std::max(widest, stretch * rho);
    z = jet.image;
  }
  return {kUnresolved, max_iter};
}

bool julia_at(const RasterGrid& g, int i, int j) {
  const int n = g.resolution();
  const std::int32_t own = g.label[g.index(i, j)];
  if (own == kUnresolved) return true;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int x = i + di, y = j + dj;
      if (x < 0 || y < 0 || x >= n || y >= n) continue;
      if (g.label[g.index(x, y)] != own) return true;
    }
  return false;
}

RasterGrid prepare(std::span<const CycleInfo> attracting, const RasterOptions& o) {
  if (attracting.empty()) throw Error("map not subhyperbolic at tolerance");
  if (o.max_iter < 0) throw PreconditionError("rasterize: max_iter must be >= 0");
  RasterGrid g(o.window, o.resolution);
  g.cycles.assign(attracting.begin(), attracting.end());
  g.capture_radius = o.capture_radius > 0.0 ? o.capture_radius : default_capture_radius(attracting);
  g.max_iter = o.max_iter;
  return g;
}

}  // namespace

RasterGrid rasterize(const RationalMap& f, std::span<const CycleInfo> attracting,
                     const RasterOptions& options) {
  RasterGrid g = prepare(attracting, options);
  const int n = g.resolution();
#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const PixelResult r = classify_pixel(f, g.cycles, g, i, j, g.max_iter, g.capture_radius);
      g.label[g.index(i, j)] = r.label;
      g.iterations[g.index(i, j)] = r.iterations;
    }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g.julia[g.index(i, j)] = julia_at(g, i, j) ? 1 : 0;
  return g;
}

RasterGrid rasterize_serial(const RationalMap& f, std::span<const CycleInfo> attracting,
                            const RasterOptions& options) {
  RasterGrid g = prepare(attracting, options);
  const int n = g.resolution();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const PixelResult r = classify_pixel(f, g.cycles, g, i, j, g.max_iter, g.capture_radius);
      g.label[g.index(i, j)] = r.label;
      g.iterations[g.index(i, j)] = r.iterations;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g.julia[g.index(i, j)] = julia_at(g, i, j) ? 1 : 0;
  return g;
}

RasterGrid rasterize(const RationalMap& f, const OrbitReport& report,
                     const RasterOptions& options) {
  if (!report.is_subhyperbolic) throw Error("map not subhyperbolic at tolerance");
  const auto cycles = report.attracting_cycles();
  return rasterize(f, cycles, options);
}

Components label_components(const RasterGrid& g) {
  const int n = g.resolution();
  Components out;
  out.map.assign(static_cast<size_t>(n) * n, -1);
  std::vector<Component> found;
  std::deque<std::pair<int, int>> queue;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const size_t start = g.index(i, j);
      if (g.julia[start] || out.map[start] >= 0) continue;
      Component c;
      c.id = static_cast<int>(found.size());
      c.label = g.label[start];
      c.first = static_cast<long>(start);
      c.i0 = c.i1 = i;
      c.j0 = c.j1 = j;
      out.map[start] = c.id;
      queue.emplace_back(i, j);
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        ++c.pixels;
        c.i0 = std::min(c.i0, x);
        c.i1 = std::max(c.i1, x);
        c.j0 = std::min(c.j0, y);
        c.j1 = std::max(c.j1, y);
        if (x == 0 || y == 0 || x == n - 1 || y == n - 1) c.touches_edge = true;
        const int nx[4] = {x + 1, x - 1, x, x};
        const int ny[4] = {y, y, y + 1, y - 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= n || ny[k] >= n) continue;
          const size_t idx = g.index(nx[k], ny[k]);
          if (g.julia[idx] || out.map[idx] >= 0) continue;
          out.map[idx] = c.id;
          queue.emplace_back(nx[k], ny[k]);
        }
      }
      found.push_back(c);
    }

  std::vector<int> order(found.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (found[a].pixels != found[b].pixels) return found[a].pixels > found[b].pixels;
    return found[a].first < found[b].first;
  });
  std::vector<int> rank(found.size());
  for (size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
    out.list.push_back(found[order[r]]);
    out.list.back().id = static_cast<int>(r);
  }
  for (auto& m : out.map)
    if (m >= 0) m = rank[m];
  return out;
}

}  // namespace carpet
