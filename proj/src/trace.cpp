#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "carpet/parallel.hpp"
#include "carpet/raster.hpp"

namespace carpet {

namespace {

struct Segment {
  cplx a, b;
  int owner;
  int index;
};

double cross(cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); }

int orient(cplx p, cplx q, cplx r) {
  const double v = cross(q - p, r - p);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(cplx p, cplx q, cplx r) {
  return std::min(p.real(), r.real()) <= q.real() && q.real() <= std::max(p.real(), r.real()) &&
         std::min(p.imag(), r.imag()) <= q.imag() && q.imag() <= std::max(p.imag(), r.imag());
}

bool segments_touch(cplx p1, cplx p2, cplx q1, cplx q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, q1, p2)) return true;
  if (o2 == 0 && on_segment(p1, q2, p2)) return true;
  if (o3 == 0 && on_segment(q1, p1, q2)) return true;
  if (o4 == 0 && on_segment(q1, p2, q2)) return true;
  return false;
}

// Buckets segments on a uniform grid and reports the first touching pair the
// predicate does not exclude.
template <class Skip>
bool any_touching(const std::vector<Segment>& segs, Skip skip, int* first, int* second) {
  if (segs.size() < 2) return false;
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY, len = 0.0;
  for (const auto& s : segs) {
    x0 = std::min({x0, s.a.real(), s.b.real()});
    x1 = std::max({x1, s.a.real(), s.b.real()});
    y0 = std::min({y0, s.a.imag(), s.b.imag()});
    y1 = std::max({y1, s.a.imag(), s.b.imag()});
    len += std::abs(s.b - s.a);
  }
  const double extent = std::max(x1 - x0, y1 - y0);
  double cell = std::max(2.0 * len / segs.size(), extent / 1024.0);
  if (!(cell > 0.0)) cell = 1.0;
  const auto nx = static_cast<long>((x1 - x0) / cell) + 1;
  const auto ny = static_cast<long>((y1 - y0) / cell) + 1;
  std::unordered_map<long, std::vector<int>> buckets;
  buckets.reserve(segs.size() * 2);
  for (size_t k = 0; k < segs.size(); ++k) {
    const auto& s = segs[k];
    const long cx0 = static_cast<long>((std::min(s.a.real(), s.b.real()) - x0) / cell);
    const long cx1 = static_cast<long>((std::max(s.a.real(), s.b.real()) - x0) / cell);
    const long cy0 = static_cast<long>((std::min(s.a.imag(), s.b.imag()) - y0) / cell);
    const long cy1 = static_cast<long>((std::max(s.a.imag(), s.b.imag()) - y0) / cell);
    for (long cy = cy0; cy <= std::min(cy1, ny - 1); ++cy)
      for (long cx = cx0; cx <= std::min(cx1, nx - 1); ++cx)
        buckets[cy * nx + cx].push_back(static_cast<int>(k));
  }
  for (const auto& [key, ids] : buckets) {
    for (size_t u = 0; u < ids.size(); ++u)
      for (size_t v = u + 1; v < ids.size(); ++v) {
        const Segment& p = segs[ids[u]];
        const Segment& q = segs[ids[v]];
        if (skip(p, q)) continue;
        if (segments_touch(p.a, p.b, q.a, q.b)) {
          if (first) *first = p.owner;
          if (second) *second = q.owner;
          return true;
        }
      }
  }
  return false;
}

double signed_area(const std::vector<cplx>& v) {
  double a = 0.0;
  for (size_t k = 0; k < v.size(); ++k) a += cross(v[k], v[(k + 1) % v.size()]);
  return 0.5 * a;
}

}  // namespace

double polyline_diameter(std::span<const cplx> v) {
  const long n = static_cast<long>(v.size());
  double best = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
  for (long a = 0; a < n; ++a)
    for (long b = a + 1; b < n; ++b) best = std::max(best, chordal_distance(v[a], v[b]));
  return best;
}

double polyline_diameter_serial(std::span<const cplx> v) {
  double best = 0.0;
  for (size_t a = 0; a < v.size(); ++a)
    for (size_t b = a + 1; b < v.size(); ++b) best = std::max(best, chordal_distance(v[a], v[b]));
  return best;
}

bool is_simple(std::span<const cplx> v) {
  const int n = static_cast<int>(v.size());
  if (n < 3) return false;
  std::vector<Segment> segs;
  segs.reserve(n);
  for (int k = 0; k < n; ++k) segs.push_back({v[k], v[(k + 1) % n], 0, k});
  auto adjacent = [n](const Segment& p, const Segment& q) {
    const int d = std::abs(p.index - q.index);
    return d <= 1 || d == n - 1;
  };
  return !any_touching(segs, adjacent, nullptr, nullptr);
}

bool curves_intersect(std::span<const PeripheralCurve> curves, int* first, int* second) {
  std::vector<Segment> segs;
  for (size_t c = 0; c < curves.size(); ++c) {
    const auto& v = curves[c].vertices;
    for (size_t k = 0; k < v.size(); ++k)
      segs.push_back({v[k], v[(k + 1) % v.size()], static_cast<int>(c), static_cast<int>(k)});
  }
  auto same = [](const Segment& p, const Segment& q) { return p.owner == q.owner; };
  return any_touching(segs, same, first, second);
}

int winding_number(std::span<const cplx> v, cplx p) {
  int w = 0;
  const size_t n = v.size();
  for (size_t k = 0; k < n; ++k) {
    const cplx a = v[k], b = v[(k + 1) % n];
    if (a.imag() <= p.imag()) {
      if (b.imag() > p.imag() && orient(a, b, p) > 0) ++w;
    } else if (b.imag() <= p.imag() && orient(a, b, p) < 0) {
      --w;
    }
  }
  return w;
}

PeripheralCurve trace_in_grid(const RasterGrid& grid, const Components& comps, int id) {
  if (id < 0 || id >= static_cast<int>(comps.list.size()))
    throw PreconditionError("trace: component id out of range");
  const Component& c = comps.list[id];
  if (c.pixels < 4) throw PreconditionError("trace: component below 4 pixels");
  if (c.touches_edge) throw Error("trace: component touches the window edge");

  // Local mask with a one-pixel background margin.
  const int w = c.i1 - c.i0 + 3, h = c.j1 - c.j0 + 3;
  std::vector<std::uint8_t> mask(static_cast<size_t>(w) * h, 0);
  auto at = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x)
      if (comps.map[grid.index(c.i0 + x - 1, c.j0 + y - 1)] == id) mask[at(x, y)] = 1;

  // Fill holes: background 8-connected to the margin stays background.
  std::vector<std::uint8_t> outside(mask.size(), 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  outside[at(0, 0)] = 1;
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const size_t k = at(nx, ny);
        if (mask[k] || outside[k]) continue;
        outside[k] = 1;
        stack.emplace_back(nx, ny);
      }
  }
  for (size_t k = 0; k < mask.size(); ++k)
    if (!outside[k]) mask[k] = 1;

  // Marching squares. Corners of a cell in counter-clockwise order (y up):
  // top-left, bottom-left, bottom-right, top-right. A segment runs from each
  // edge crossed inside->outside to the previous edge crossed outside->inside,
  // which keeps diagonal-only neighbors apart and the interior on the left.
  const long stride = 2L * h + 1;
  auto key = [stride](int x2, int y2) { return static_cast<long>(x2) * stride + y2; };
  std::unordered_map<long, long> next;
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const int cx[4] = {x, x, x + 1, x + 1};
      const int cy[4] = {y, y + 1, y + 1, y};
      bool in[4];
      for (int k = 0; k < 4; ++k) in[k] = mask[at(cx[k], cy[k])] != 0;
      for (int k = 0; k < 4; ++k) {
        const int k1 = (k + 1) % 4;
        if (!(in[k] && !in[k1])) continue;
        for (int s = 1; s <= 4; ++s) {
          const int m = (k - s + 8) % 4, m1 = (m + 1) % 4;
          if (!in[m] && in[m1]) {
            const long from = key(cx[k] + cx[k1], cy[k] + cy[k1]);
            const long to = key(cx[m] + cx[m1], cy[m] + cy[m1]);
            next[from] = to;
            break;
          }
        }
      }
    }
  if (next.empty()) throw Error("trace: empty contour");

  long start = std::numeric_limits<long>::max();
  for (const auto& [k, v] : next) start = std::min(start, k);
  std::vector<cplx> chart;
  long cur = start;
  const double px = grid.pixel_size();
  const Window& win = grid.window();
  do {
    const double gx = c.i0 - 1 + (cur / stride) * 0.5;
    const double gy = c.j0 - 1 + (cur % stride) * 0.5;
    chart.emplace_back(win.center.real() - win.half_width + (gx + 0.5) * px,
                       win.center.imag() + win.half_width - (gy + 0.5) * px);
    const auto it = next.find(cur);
    if (it == next.end()) throw Error("trace: open contour");
    cur = it->second;
    if (chart.size() > next.size()) throw Error("trace: contour does not close");
  } while (cur != start);
  if (chart.size() != next.size()) throw Error("trace: component boundary has several contours");
  if (signed_area(chart) < 0.0) std::reverse(chart.begin(), chart.end());

  PeripheralCurve out;
  out.component = id;
  out.traced_inverted = win.inverted;
  out.pixel_size = px;
  out.chordal_pixel = 2.0 * px / (1.0 + std::norm(chart.front()));
  out.vertices.reserve(chart.size());
  for (cplx u : chart) out.vertices.push_back(win.inverted ? 1.0 / u : u);
  out.diameter = polyline_diameter(out.vertices);
  return out;
}

Scene build_scene(const RationalMap& f, std::span<const CycleInfo> attracting,
                  const RasterOptions& options) {
  Scene s;
  RasterOptions std_opt = options;
  std_opt.window.inverted = false;
  s.grid = rasterize(f, attracting, std_opt);
  RasterOptions inv_opt = options;
  inv_opt.window = Window{cplx{}, options.window.half_width, true};
  inv_opt.capture_radius = s.grid.capture_radius;
  s.inverted = rasterize(f, attracting, inv_opt);
  s.comps = label_components(s.grid);
  s.inv_comps = label_components(s.inverted);
  return s;
}

PeripheralCurve trace_peripheral_curve(const Scene& scene, int id) {
  if (id < 0 || id >= static_cast<int>(scene.comps.list.size()))
    throw PreconditionError("trace: component id out of range");
  const Component& c = scene.comps.list[id];
  if (!c.touches_edge) return trace_in_grid(scene.grid, scene.comps, id);

  // Representative: the component pixel farthest from the chart origin.
  int bi = -1, bj = -1;
  double far = -1.0;
  for (int j = c.j0; j <= c.j1; ++j)
    for (int i = c.i0; i <= c.i1; ++i) {
      if (scene.comps.map[scene.grid.index(i, j)] != id) continue;
      const double r = std::abs(scene.grid.pixel_center(i, j));
      if (r > far) {
        far = r;
        bi = i;
        bj = j;
      }
    }
  const SpherePoint rep = scene.grid.pixel_point(bi, bj);
  int ii = 0, jj = 0;
  int inv_id = -1;
  if (scene.inverted.locate(rep, ii, jj)) {
    const int n = scene.inverted.resolution();
    for (int r = 0; r <= 3 && inv_id < 0; ++r)
      for (int dy = -r; dy <= r && inv_id < 0; ++dy)
        for (int dx = -r; dx <= r && inv_id < 0; ++dx) {
          const int x = ii + dx, y = jj + dy;
          if (x < 0 || y < 0 || x >= n || y >= n) continue;
          inv_id = scene.inv_comps.map[scene.inverted.index(x, y)];
        }
  }
  if (inv_id < 0 || scene.inv_comps.list[inv_id].touches_edge)
    throw Error("trace: component touches the window edge in both charts");
  PeripheralCurve out = trace_in_grid(scene.inverted, scene.inv_comps, inv_id);
  out.component = id;
  return out;
}

std::vector<PeripheralCurve> trace_all(const Scene& scene, int min_pixels) {
  std::vector<int> ids;
  for (const auto& c : scene.comps.list)
    if (c.pixels >= std::max(4, min_pixels)) ids.push_back(c.id);
  std::vector<PeripheralCurve> out(ids.size());
  for (size_t k = 0; k < ids.size(); ++k) out[k] = trace_peripheral_curve(scene, ids[k]);
  return out;
}

CarpetEvidence carpet_evidence(const Scene& scene, std::span<const PeripheralCurve> curves) {
  CarpetEvidence e;
  e.components = static_cast<int>(scene.comps.list.size());
  for (const auto& c : scene.comps.list) {
    if (c.pixels < 4) ++e.sub_resolution;
    if (c.touches_edge) ++e.unbounded;
  }
  e.traced = static_cast<int>(curves.size());
  e.all_simple = std::all_of(curves.begin(), curves.end(),
                             [](const PeripheralCurve& c) { return is_simple(c.vertices); });
  e.pairwise_disjoint = !curves_intersect(curves);
  e.min_diameter_px = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) e.min_diameter_px = std::min(e.min_diameter_px, c.diameter / c.chordal_pixel);
  if (curves.empty()) e.min_diameter_px = 0.0;
  e.consistent = e.traced >= 10 && e.all_simple && e.pairwise_disjoint && e.min_diameter_px <= 10.0;
  return e;
}

}  // namespace carpet
