#include "carpet/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "carpet/parallel.hpp"

namespace carpet {

namespace {

using Vec3 = std::array<double, 3>;

// Chordal distance is the chord length between stereographic images on the
// unit sphere; the Euclidean metric embeds the plane at height 0.
Vec3 embed(cplx z, Metric m) {
  if (m == Metric::Euclidean) return {z.real(), z.imag(), 0.0};
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return {0.0, 0.0, 1.0};
  const double r2 = std::norm(z);
  return {2.0 * z.real() / (1.0 + r2), 2.0 * z.imag() / (1.0 + r2), (r2 - 1.0) / (r2 + 1.0)};
}

double dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Vec3 ap{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const double len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
  double t = len2 > 0.0 ? (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3 q{a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]};
  return dist(p, q);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double t = pos - static_cast<double>(lo);
  if (t == 0.0 || v[lo] == v[hi]) return v[lo];
  return v[lo] + t * (v[hi] - v[lo]);
}

struct Box {
  Vec3 lo{INFINITY, INFINITY, INFINITY};
  Vec3 hi{-INFINITY, -INFINITY, -INFINITY};
  void add(const Vec3& p) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
};

double box_gap(const Box& a, const Box& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double g = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    s += g * g;
  }
  return std::sqrt(s);
}

double box_point_gap(const Box& a, const Vec3& p) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double g = std::max({0.0, a.lo[k] - p[k], p[k] - a.hi[k]});
    s += g * g;
  }
  return std::sqrt(s);
}

std::vector<Vec3> embed_all(std::span<const cplx> v, Metric m) {
  std::vector<Vec3> out(v.size());
  for (size_t k = 0; k < v.size(); ++k) out[k] = embed(v[k], m);
  return out;
}

double diameter(const std::vector<Vec3>& p) {
  double best = 0.0;
  for (size_t a = 0; a < p.size(); ++a)
    for (size_t b = a + 1; b < p.size(); ++b) best = std::max(best, dist(p[a], p[b]));
  return best;
}

// Vertex-to-segment distance in both directions.
double curve_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  auto one_way = [&](const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
    for (const auto& v : p)
      for (size_t k = 0; k < q.size(); ++k)
        best = std::min(best, point_segment(v, q[k], q[(k + 1) % q.size()]));
  };
  one_way(a, b);
  one_way(b, a);
  return best;
}

}  // namespace

double quasicircle_constant(std::span<const cplx> input, Metric metric) {
  std::vector<cplx> v;
  v.reserve(input.size());
  for (cplx z : input)
    if (v.empty() || z != v.back()) v.push_back(z);
  while (v.size() > 1 && v.front() == v.back()) v.pop_back();
  if (v.size() < 8) throw PreconditionError("quasicircle_constant: needs at least 8 vertices");
  if (v.size() > static_cast<size_t>(kQuasicircleVertexCap)) {
    std::vector<cplx> r(kQuasicircleVertexCap);
    for (int k = 0; k < kQuasicircleVertexCap; ++k)
      r[k] = v[static_cast<size_t>(k) * v.size() / kQuasicircleVertexCap];
    v = std::move(r);
  }
  const auto pts = embed_all(v, metric);
  const int n = static_cast<int>(pts.size());
  auto d = [&](int a, int b) { return dist(pts[a % n], pts[b % n]); };

  // D_L[i] = diameter of the arc i, i+1, ..., i+L (indices mod n):
  // D_L[i] = max(D_{L-1}[i], D_{L-1}[i+1], d(i, i+L)).
  // Levels up to n/2 are stored; each unordered pair is visited once as the
  // long arc (L >= n/2) of one endpoint, whose complement is a stored level.
  const int half = n / 2;
  std::vector<std::vector<double>> stored(half + 1, std::vector<double>(n, 0.0));
  std::vector<double> prev(n, 0.0), cur(n);
  for (int L = 1; L <= half; ++L) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) cur[i] = std::max({prev[i], prev[(i + 1) % n], d(i, i + L)});
    if (L <= half) stored[L] = cur;
    std::swap(prev, cur);
  }
  // Re-run to visit pairs with the long level in hand; stored levels cover the
  // short complements.
  double best = 1.0;
  std::fill(prev.begin(), prev.end(), 0.0);
  for (int L = 1; L < n; ++L) {
    for (int i = 0; i < n; ++i) cur[i] = std::max({prev[i], prev[(i + 1) % n], d(i, i + L)});
    std::swap(prev, cur);
    if (L < n - half) continue;
    const std::vector<double>& shortlvl = stored[n - L];
    double lbest = 0.0;
#pragma omp parallel for schedule(static) reduction(max : lbest)
    for (int i = 0; i < n; ++i) {
      const int j = (i + L) % n;
      const double s = d(i, j);
      const double arc = std::min(prev[i], shortlvl[j]);
      lbest = std::max(lbest, s > 0.0 ? arc / s : std::numeric_limits<double>::infinity());
    }
    best = std::max(best, lbest);
  }
  return best;
}

double quasicircle_constant(const PeripheralCurve& curve) {
  return quasicircle_constant(curve.vertices, Metric::Chordal);
}

Separation relative_separation(std::span<const std::vector<cplx>> curves, Metric metric) {
  if (curves.size() < 2) throw PreconditionError("relative_separation: needs at least 2 curves");
  const size_t m = curves.size();
  std::vector<std::vector<Vec3>> pts(m);
  std::vector<Box> boxes(m);
  std::vector<double> diam(m);
  for (size_t k = 0; k < m; ++k) {
    pts[k] = embed_all(curves[k], metric);
    for (const auto& p : pts[k]) boxes[k].add(p);
    diam[k] = diameter(pts[k]);
  }
  struct Cand {
    double bound;
    int a, b;
  };
  std::vector<Cand> cands;
  for (size_t a = 0; a < m; ++a)
    for (size_t b = a + 1; b < m; ++b) {
      const double md = std::min(diam[a], diam[b]);
      cands.push_back({md > 0.0 ? box_gap(boxes[a], boxes[b]) / md : INFINITY,
                       static_cast<int>(a), static_cast<int>(b)});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.bound != y.bound) return x.bound < y.bound;
    return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
  });
  Separation out;
  out.c = std::numeric_limits<double>::infinity();
  for (const Cand& c : cands) {
    if (c.bound >= out.c) break;
    const double ratio = curve_distance(pts[c.a], pts[c.b]) / std::min(diam[c.a], diam[c.b]);
    if (ratio < out.c) {
      out.c = ratio;
      out.first = c.a;
      out.second = c.b;
    }
  }
  if (out.c == 0.0) out.intersecting = true;
  return out;
}

Separation relative_separation(std::span<const PeripheralCurve> curves, Metric metric) {
  if (curves.size() < 2) throw PreconditionError("relative_separation: needs at least 2 curves");
  int a = -1, b = -1;
  if (curves_intersect(curves, &a, &b)) {
    Separation s;
    s.c = 0.0;
    s.first = a;
    s.second = b;
    s.intersecting = true;
    return s;
  }
  std::vector<std::vector<cplx>> raw;
  raw.reserve(curves.size());
  for (const auto& c : curves) raw.push_back(c.vertices);
  return relative_separation(std::span<const std::vector<cplx>>(raw), metric);
}

ScaleStats locations_and_scales(std::span<const PeripheralCurve> curves, const RasterGrid& grid,
                                long n_samples, std::uint64_t seed, double c_limit) {
  std::vector<size_t> julia;
  for (size_t k = 0; k < grid.julia.size(); ++k)
    if (grid.julia[k]) julia.push_back(k);
  if (julia.empty() || curves.empty() || n_samples < 1)
    throw PreconditionError("locations_and_scales: no admissible samples");

  const size_t m = curves.size();
  std::vector<std::vector<Vec3>> pts(m);
  std::vector<Box> boxes(m);
  for (size_t k = 0; k < m; ++k) {
    pts[k] = embed_all(curves[k].vertices, Metric::Chordal);
    for (const auto& p : pts[k]) boxes[k].add(p);
  }

  // Draw all samples first so the parallel loop is deterministic.
  std::mt19937_64 rng(seed);
  const int n = grid.resolution();
  std::vector<Vec3> centers(n_samples);
  std::vector<double> radii(n_samples);
  for (long s = 0; s < n_samples; ++s) {
    const size_t k = julia[static_cast<size_t>(uniform01(rng) * julia.size()) % julia.size()];
    const int i = static_cast<int>(k % n), j = static_cast<int>(k / n);
    centers[s] = embed(grid.pixel_point(i, j).is_infinity() ? cplx(INFINITY, 0)
                                                             : grid.pixel_point(i, j).value(),
                       Metric::Chordal);
    const double lo = std::min(8.0 * 2.0 * grid.chordal_half_pixel(i, j) / std::sqrt(2.0), 2.0);
    radii[s] = lo * std::pow(2.0 / lo, uniform01(rng));
  }

  ScaleStats out;
  out.c_limit = c_limit;
  out.samples = n_samples;
  out.per_sample.assign(n_samples, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic, 16)
  for (long s = 0; s < n_samples; ++s) {
    double best = std::numeric_limits<double>::infinity();
    const double r = radii[s];
    for (size_t k = 0; k < m; ++k) {
      if (box_point_gap(boxes[k], centers[s]) > r) continue;
      const double dk = curves[k].diameter;
      const double need = dk > 0.0 ? std::max(r / dk, dk / r) : INFINITY;
      if (need >= best) continue;
      bool meets = false;
      for (const auto& v : pts[k])
        if (dist(v, centers[s]) <= r) {
          meets = true;
          break;
        }
      if (meets) best = need;
    }
    out.per_sample[s] = best;
  }
  out.C = percentile(out.per_sample, 0.99);
  out.pass_rate = static_cast<double>(std::count_if(out.per_sample.begin(), out.per_sample.end(),
                                                    [&](double c) { return c <= c_limit; })) /
                  static_cast<double>(n_samples);
  return out;
}

namespace {

// 1D squared distance transform (Felzenszwalb-Huttenlocher lower envelope).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -INFINITY;
  z[1] = INFINITY;
  for (int q = 1; q < n; ++q) {
    if (f[q] == INFINITY) continue;
    if (f[v[k]] == INFINITY) {
      v[k] = q;
      continue;
    }
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = INFINITY;
  }
  if (f[v[0]] == INFINITY && k == 0) {
    for (int q = 0; q < n; ++q) d[q] = INFINITY;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_to_julia(const RasterGrid& grid) {
  const int n = grid.resolution();
  std::vector<double> g(static_cast<size_t>(n) * n);
  for (size_t k = 0; k < g.size(); ++k) g[k] = grid.julia[k] ? 0.0 : INFINITY;
#pragma omp parallel
  {
    std::vector<double> f(n), d(n), zb(n + 1);
    std::vector<int> v(n);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) f[j] = g[static_cast<size_t>(j) * n + i];
      edt_1d(f.data(), d.data(), n, v, zb);
      for (int j = 0; j < n; ++j) g[static_cast<size_t>(j) * n + i] = d[j];
    }
#pragma omp for schedule(static)
    for (int j = 0; j < n; ++j) {
      double* row = g.data() + static_cast<size_t>(j) * n;
      std::copy(row, row + n, f.begin());
      edt_1d(f.data(), d.data(), n, v, zb);
      for (int i = 0; i < n; ++i) row[i] = std::sqrt(d[i]);
    }
  }
  return g;
}

PorosityStats porosity_constant(const RasterGrid& grid, long n_samples, std::uint64_t seed) {
  const int n = grid.resolution();
  if (n_samples < 1) throw PreconditionError("porosity_constant: needs samples");
  const std::vector<double> edt = distance_to_julia(grid);
  std::vector<size_t> pool;
  for (size_t k = 0; k < grid.julia.size(); ++k)
    if (grid.julia[k]) pool.push_back(k);
  if (pool.empty()) {
    pool.resize(grid.julia.size());
    std::iota(pool.begin(), pool.end(), size_t{0});
  }
  const double r_hi = std::max(8.0, std::min(128.0, n / 4.0));
  std::mt19937_64 rng(seed);
  std::vector<size_t> at(n_samples);
  std::vector<double> radius(n_samples);
  for (long s = 0; s < n_samples; ++s) {
    at[s] = pool[static_cast<size_t>(uniform01(rng) * pool.size()) % pool.size()];
    radius[s] = 8.0 * std::pow(r_hi / 8.0, uniform01(rng));
  }
  std::vector<double> ratio(n_samples);
  std::vector<std::uint8_t> pass(n_samples);
#pragma omp parallel for schedule(dynamic, 8)
  for (long s = 0; s < n_samples; ++s) {
    const int pi = static_cast<int>(at[s] % n), pj = static_cast<int>(at[s] / n);
    const double r = radius[s];
    const int rr = static_cast<int>(std::ceil(r));
    double best = 0.0;
    for (int j = std::max(0, pj - rr); j <= std::min(n - 1, pj + rr); ++j)
      for (int i = std::max(0, pi - rr); i <= std::min(n - 1, pi + rr); ++i) {
        const double off = std::hypot(i - pi, j - pj);
        if (off > r) continue;
        // The disk must stay inside B(p, r) and clear every julia pixel center
        // by half a pixel; outside the window counts as empty.
        const double empty = edt[static_cast<size_t>(j) * n + i] - 0.5;
        best = std::max(best, std::min(empty, r - off));
      }
    best = std::max(best, 0.0);
    ratio[s] = best / r;
    pass[s] = best > 1.0;
  }
  PorosityStats out;
  out.samples = n_samples;
  out.c_por = percentile(ratio, 0.01);
  out.pass_rate = static_cast<double>(std::count(pass.begin(), pass.end(), std::uint8_t{1})) /
                  static_cast<double>(n_samples);
  return out;
}

std::vector<DistortionBin> qs_distortion(std::span<const cplx> x, std::span<const cplx> y,
                                         long n_triples, std::uint64_t seed, int bins,
                                         Metric metric) {
  if (x.size() != y.size() || x.size() < 3)
    throw PreconditionError("qs_distortion: needs at least 3 matched samples");
  const auto px = embed_all(x, metric);
  const auto py = embed_all(y, metric);
  std::vector<std::vector<double>> outs(bins);
  std::vector<DistortionBin> out(bins);
  const double lo = std::log(1e-3), hi = std::log(1e3);
  for (int b = 0; b < bins; ++b) {
    out[b].lo = std::exp(lo + (hi - lo) * b / bins);
    out[b].hi = std::exp(lo + (hi - lo) * (b + 1) / bins);
  }
  std::mt19937_64 rng(seed);
  const size_t m = x.size();
  for (long t = 0; t < n_triples; ++t) {
    const size_t u = rng() % m, v = rng() % m, w = rng() % m;
    if (u == w || u == v) continue;
    const double dw = dist(px[u], px[w]), dv = dist(px[u], px[v]);
    const double ew = dist(py[u], py[w]), ev = dist(py[u], py[v]);
    if (dw == 0.0 || ew == 0.0) continue;
    const double in = dv / dw;
    if (!(in > 0.0)) continue;
    const int b = static_cast<int>(std::floor((std::log(in) - lo) / (hi - lo) * bins));
    if (b < 0 || b >= bins) continue;
    outs[b].push_back(ev / ew);
  }
  for (int b = 0; b < bins; ++b) {
    out[b].count = static_cast<long>(outs[b].size());
    out[b].q99 = outs[b].empty() ? 0.0 : percentile(outs[b], 0.99);
  }
  return out;
}

GeometryReport geometry_report(const Scene& scene, std::span<const PeripheralCurve> curves,
                               long n_samples, std::uint64_t seed) {
  GeometryReport r;
  r.curves = static_cast<int>(curves.size());
  r.quasicircle.resize(curves.size(), 0.0);
  for (size_t k = 0; k < curves.size(); ++k) {
    if (curves[k].vertices.size() < 8) continue;
    r.quasicircle[k] = quasicircle_constant(curves[k]);
    r.L = std::max(r.L, r.quasicircle[k]);
  }
  if (curves.size() >= 2) r.separation = relative_separation(curves);
  r.scales = locations_and_scales(curves, scene.grid, n_samples, seed);
  r.porosity = porosity_constant(scene.grid, n_samples, seed);
  return r;
}

}  // namespace carpet
