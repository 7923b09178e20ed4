#include "carpet/elevator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "carpet/parallel.hpp"
#include "carpet/raster.hpp"
#include "carpet/roots.hpp"

namespace carpet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<cplx> disk_samples(cplx p, double r, int boundary, int interior) {
  std::vector<cplx> s;
  s.reserve(boundary + 1 + interior);
  for (int j = 0; j < boundary; ++j) s.push_back(p + std::polar(r, kTwoPi * j / boundary));
  s.push_back(p);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < interior; ++j)
    s.push_back(p + std::polar(r * std::sqrt((j + 0.5) / interior), golden * j));
  return s;
}

double diameter(std::span<const cplx> pts) {
  double d = 0.0;
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b) d = std::max(d, std::abs(pts[a] - pts[b]));
  return d;
}

// Width along 64 directions; exact up to a factor cos(pi / 128).
double approximate_diameter(std::span<const cplx> pts) {
  std::vector<cplx> extremes;
  for (int t = 0; t < 64; ++t) {
    const cplx dir = std::polar(1.0, std::numbers::pi * t / 64);
    size_t lo = 0, hi = 0;
    for (size_t k = 1; k < pts.size(); ++k) {
      const double v = (pts[k] * std::conj(dir)).real();
      if (v < (pts[lo] * std::conj(dir)).real()) lo = k;
      if (v > (pts[hi] * std::conj(dir)).real()) hi = k;
    }
    extremes.push_back(pts[lo]);
    extremes.push_back(pts[hi]);
  }
  return diameter(extremes);
}

SpherePoint step(const RationalMap& f, const SpherePoint& z) { return f(z); }

std::vector<cplx> finite_points(std::span<const SpherePoint> s) {
  std::vector<cplx> out;
  for (const auto& p : s)
    if (p.is_finite()) out.push_back(p.value());
  return out;
}

double lipschitz_estimate(const RationalMap& f, std::span<const cplx> julia, double eps) {
  double l = 0.0;
  const cplx offsets[5] = {0.0, eps, -eps, cplx(0, eps), cplx(0, -eps)};
  for (cplx c : julia)
    for (cplx o : offsets) {
      const double d = std::abs(f.derivative(c + o));
      if (std::isfinite(d)) l = std::max(l, d);
    }
  return 1.1 * std::max(l, 1e-300);
}

struct PixelStats {
  double max_modulus = 0.0;
  double min_post_c = std::numeric_limits<double>::infinity();
  double min_second_post = std::numeric_limits<double>::infinity();
};

PixelStats pixel_stats(const ElevatorContext& ctx) {
  PixelStats s;
  const auto post = finite_points(ctx.post);
  const auto post_c = finite_points(ctx.post_c);
  for (cplx c : ctx.julia.points()) {
    s.max_modulus = std::max(s.max_modulus, std::abs(c));
    for (cplx q : post_c) s.min_post_c = std::min(s.min_post_c, std::abs(c - q));
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (cplx q : post) {
      const double d = std::abs(c - q);
      if (d < d1) {
        d2 = d1;
        d1 = d;
      } else if (d < d2) {
        d2 = d;
      }
    }
    s.min_second_post = std::min(s.min_second_post, d2);
  }
  return s;
}

bool eps_admissible(const ElevatorContext& ctx, const PixelStats& s, double eps) {
  return ctx.julia_diameter > 2.0 * eps && s.max_modulus + 8.0 * eps < 1.0 &&
         s.min_post_c > 8.0 * eps && s.min_second_post > 8.0 * eps;
}

// Nearest of the julia pixel centers and the exact orbit point.
cplx nearest_julia(const ElevatorContext& ctx, cplx center, cplx orbit_point) {
  const auto [idx, d] = ctx.julia.nearest(center);
  if (idx < 0 || std::abs(orbit_point - center) <= d) return orbit_point;
  return ctx.julia.points()[idx];
}

double max_distance(std::span<const cplx> pts, cplx c) {
  double m = 0.0;
  for (cplx z : pts) m = std::max(m, std::abs(z - c));
  return m;
}

cplx bbox_center(std::span<const cplx> pts) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (cplx z : pts) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  return {(x0 + x1) / 2, (y0 + y1) / 2};
}

void finish_context(ElevatorContext& ctx) {
  ctx.julia_diameter = approximate_diameter(ctx.julia.points());
  ctx.eps0 = 0.5 * select_eps0(ctx);
  if (!(ctx.eps0 > 0.0)) throw Error("normalize: no admissible eps0");
  ctx.lipschitz = lipschitz_estimate(ctx.map, ctx.julia.points(), ctx.eps0);
  ctx.delta0 = ctx.eps0 / (1.5 * ctx.lipschitz);
}

}  // namespace

cplx iterate_point(const RationalMap& f, cplx z, int n) {
  SpherePoint w(z);
  for (int i = 0; i < n; ++i) w = step(f, w);
  return w.is_finite() ? w.value() : cplx(INFINITY, INFINITY);
}

std::vector<cplx> backward_orbit_points(const RationalMap& f, int count, std::uint64_t seed) {
  const auto fixed = repelling_fixed_points(f);
  if (fixed.empty()) throw Error("backward_orbit_points: no finite repelling fixed point to seed J");
  std::mt19937_64 rng(seed);
  SpherePoint z = fixed.front();
  std::vector<cplx> out;
  out.reserve(count);
  for (int step = 0; static_cast<int>(out.size()) < count; ++step) {
    const auto pre = preimages(f, z);
    std::vector<SpherePoint> finite;
    for (const auto& p : pre)
      if (p.point.is_finite()) finite.push_back(p.point);
    if (finite.empty()) throw Error("backward_orbit_points: backward orbit left the plane");
    z = finite[rng() % finite.size()];
    if (step >= 20) out.push_back(z.value());
  }
  return out;
}

std::vector<cplx> repelling_fixed_points(const RationalMap& f) {
  const Polynomial z = Polynomial::monomial(1);
  const Polynomial g = f.numerator() - z * f.denominator();
  std::vector<cplx> out;
  if (g.is_zero()) return out;
  for (const Root& r : polynomial_roots(g)) {
    const ChartJet j = f.jet(r.z);
    if (r.multiplicity == 1 && std::abs(j.derivative) > 1.0 + 1e-9) out.push_back(r.z);
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

double select_eps0(const ElevatorContext& ctx) {
  const PixelStats s = pixel_stats(ctx);
  double lo = 0.0, hi = ctx.julia_diameter / 4.0;
  if (eps_admissible(ctx, s, hi)) return hi;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eps_admissible(ctx, s, mid) ? lo : hi) = mid;
  }
  return lo;
}

ElevatorContext normalize(const RationalMap& f, const NormalizeOptions& options) {
  if (f.degree() < 2) throw PreconditionError("normalize: degree must be at least 2");
  const OrbitReport report = postcritical_report(f);
  const auto cycles = report.attracting_cycles();
  if (cycles.empty()) throw Error("normalize: no attracting cycle");

  // Prefer a cycle through infinity, then superattracting, then short.
  const CycleInfo* best = &cycles.front();
  auto rank = [](const CycleInfo& c) {
    bool has_inf = false;
    for (const auto& p : c.points) has_inf |= p.is_infinity();
    return std::tuple(!has_inf, c.cls != CycleClass::Superattracting, c.period, c.multiplier);
  };
  for (const auto& c : cycles)
    if (rank(c) < rank(*best)) best = &c;
  SpherePoint q = best->points.front();
  for (const auto& p : best->points)
    if (p.is_infinity()) q = p;
  const int period = best->period;
  const RationalMap g = period > 1 ? iterate(f, period) : f;
  const MoebiusMap to_inf =
      q.is_infinity() ? MoebiusMap::identity() : MoebiusMap(0.0, 1.0, 1.0, -q.value());

  // Extent of J after moving q to infinity.
  const RationalMap moved = conjugate(g, to_inf);
  const auto moved_cycles = postcritical_report(moved).attracting_cycles();
  double rho = 0.0;
  for (double hw = 2.0;; hw *= 2.0) {
    if (hw > 4096.0) throw Error("normalize: julia raster does not fit any window");
    RasterOptions o;
    o.window.half_width = hw;
    o.resolution = 256;
    o.max_iter = options.max_iter;
    const RasterGrid grid = rasterize(moved, moved_cycles, o);
    const int n = grid.resolution();
    bool edge = false;
    rho = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!grid.julia[grid.index(i, j)]) continue;
        edge |= (i == 0 || j == 0 || i == n - 1 || j == n - 1);
        rho = std::max(rho, std::abs(grid.pixel_center(i, j)) + grid.pixel_size() * M_SQRT1_2);
      }
    if (rho == 0.0) throw Error("normalize: no julia pixels");
    if (!edge) break;
  }

  double s = rho / 0.45;
  for (int attempt = 0; attempt < 3; ++attempt, s *= 1.25) {
    const MoebiusMap m = MoebiusMap(1.0, 0.0, 0.0, s) * to_inf;
    const RationalMap F = conjugate(g, m);
    const OrbitReport rep = postcritical_report(F);
    RasterOptions o;
    o.window.half_width = 0.55;
    o.resolution = options.resolution;
    o.max_iter = options.max_iter;
    const RasterGrid grid = rasterize(F, rep.attracting_cycles(), o);
    const int n = grid.resolution();
    std::vector<cplx> julia;
    double radius = 0.0;
    bool edge = false;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!grid.julia[grid.index(i, j)]) continue;
        edge |= (i == 0 || j == 0 || i == n - 1 || j == n - 1);
        julia.push_back(grid.pixel_center(i, j));
        radius = std::max(radius, std::abs(julia.back()) + grid.pixel_size() * M_SQRT1_2);
      }
    double outer = INFINITY;
    for (int t = 0; t < 1000; ++t) {
      const SpherePoint w = F(SpherePoint(std::polar(1.0, kTwoPi * t / 1000)));
      outer = std::min(outer, w.is_infinity() ? INFINITY : std::abs(w.value()));
    }
    if (julia.empty() || edge || radius >= 0.5 || !(outer > 1.0)) continue;

    ElevatorContext ctx(F, m);
    ctx.period = period;
    ctx.scale = s;
    ctx.pixel = grid.pixel_size();
    ctx.critical = rep.critical;
    ctx.post = rep.post;
    ctx.post_c = rep.post_c;
    ctx.N = rep.degree_bound;
    ctx.julia = PointIndex(std::move(julia));
    ctx.julia_radius = radius;
    ctx.outer_modulus = outer;
    ctx.seeds = backward_orbit_points(F, options.seeds, options.seed);
    finish_context(ctx);
    return ctx;
  }
  throw Error("normalize: J in half disk / invariant outer disk check failed after 3 rescalings");
}

ElevatorContext synthetic_context(const RationalMap& map, std::vector<cplx> julia,
                                  std::vector<cplx> seeds, double eps0, double pixel) {
  if (julia.empty()) throw PreconditionError("synthetic_context: no julia points");
  ElevatorContext ctx(map, MoebiusMap::identity());
  if (map.degree() >= 2) {
    ctx.critical = critical_points(map);
    ctx.N = degree_bound_N(ctx.critical);
  }
  ctx.pixel = pixel;
  ctx.julia = PointIndex(std::move(julia));
  ctx.seeds = std::move(seeds);
  ctx.julia_diameter = approximate_diameter(ctx.julia.points());
  for (cplx z : ctx.julia.points()) ctx.julia_radius = std::max(ctx.julia_radius, std::abs(z));
  ctx.eps0 = eps0;
  ctx.lipschitz = lipschitz_estimate(map, ctx.julia.points(), eps0);
  ctx.delta0 = eps0 / (1.5 * ctx.lipschitz);
  return ctx;
}

ElevatorResult elevate(const ElevatorContext& ctx, cplx p, double r) {
  if (!(r > 0.0) || !(r < ctx.eps0))
    throw PreconditionError("elevate: radius must satisfy 0 < r < eps0");
  if (!(ctx.julia.distance(p) <= 1.5 * ctx.pixel))
    throw PreconditionError("elevate: center is not within a pixel of J");

  ElevatorResult res;
  res.p = p;
  res.r = r;
  std::vector<cplx> cloud = disk_samples(p, r, kElevatorBoundary, kElevatorInterior);
  const size_t center_idx = kElevatorBoundary;
  std::vector<cplx> orbit;
  std::vector<cplx> kept;
  for (int m = 0;; ++m) {
    bool finite = true;
    for (cplx z : cloud) finite &= std::isfinite(z.real()) && std::isfinite(z.imag());
    bool contained = false;
    cplx qt{};
    if (finite) {
      qt = nearest_julia(ctx, bbox_center(cloud), cloud[center_idx]);
      contained = max_distance(cloud, qt) <= ctx.eps0;
    }
    // B itself lies in the eps0-disk about its own center.
    if (m == 0 && !contained) {
      contained = true;
      qt = p;
    }
    if (!contained) break;
    res.n = m;
    res.q_tilde = qt;
    kept = cloud;
    orbit.push_back(cloud[center_idx]);
    if (m >= kElevatorCap) throw Error("elevate: iteration cap exceeded; radius below numeric floor");
    for (cplx& z : cloud) z = iterate_point(ctx.map, z, 1);
  }
  orbit.resize(res.n);
  res.images = kept;
  res.image_diameter = diameter(kept);

  std::vector<cplx> near;
  for (cplx q : finite_points(ctx.post))
    if (std::abs(q - res.q_tilde) < 2.0 * ctx.eps0) near.push_back(q);
  if (near.empty()) {
    res.center = res.q_tilde;
    res.radius = 2.0 * ctx.eps0;
  } else {
    std::sort(near.begin(), near.end(), [&](cplx a, cplx b) {
      return std::abs(a - res.q_tilde) < std::abs(b - res.q_tilde);
    });
    res.adjusted = true;
    res.center = near.front();
    res.radius = 8.0 * ctx.eps0;
  }
  res.inside_half = max_distance(res.images, res.center) <= 0.5 * res.radius * (1.0 + 1e-12);

  // Degree along the branch of f^-n through p: orbit product of local degrees.
  res.k = 1;
  if (res.adjusted && res.n > 0 && !ctx.critical.empty()) {
    SpherePoint y(res.center);
    for (int j = res.n - 1; j >= 0; --j) {
      const auto pre = preimages(ctx.map, y);
      const Preimage* pick = nullptr;
      double bd = INFINITY;
      for (const auto& c : pre) {
        if (!c.point.is_finite()) continue;
        const double d = std::abs(c.point.value() - orbit[j]);
        if (d < bd) {
          bd = d;
          pick = &c;
        }
      }
      if (!pick) throw Error("elevate: branch left the plane");
      res.k *= local_degree(ctx.critical, pick->point);
      y = pick->point;
    }
    res.branch_point = y.value();
  } else if (!ctx.critical.empty()) {
    for (int j = 0; j < res.n; ++j) res.k *= local_degree(ctx.critical, SpherePoint(orbit[j]));
  }
  res.degree_ok = res.k <= ctx.N;
  res.diameter_ok = res.image_diameter >= ctx.delta0;
  return res;
}

NestedCheck nested_consistency(const ElevatorContext& ctx, cplx p, double r, double tolerance) {
  if (tolerance < 0.0) tolerance = 2.0 * ctx.pixel;
  NestedCheck out;
  ElevatorResult e[3];
  for (int t = 0; t < 3; ++t) {
    e[t] = elevate(ctx, p, r / (1 << t));
    out.n[t] = e[t].n;
  }
  out.monotone = out.n[0] <= out.n[1] && out.n[1] <= out.n[2];
  out.worst_excess = -INFINITY;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      for (int j = 0; j < kElevatorBoundary; ++j) {
        const cplx z = p + std::polar(e[b].r, kTwoPi * j / kElevatorBoundary);
        const cplx w = iterate_point(ctx.map, z, e[a].n);
        out.worst_excess = std::max(out.worst_excess, std::abs(w - e[a].center) - 0.5 * e[a].radius);
      }
  out.lands = out.worst_excess <= tolerance;
  return out;
}

std::vector<std::pair<cplx, double>> sample_disks(const ElevatorContext& ctx, int n,
                                                  std::uint64_t seed, double r_lo, double r_hi) {
  if (ctx.seeds.empty()) throw PreconditionError("sample_disks: context has no seed points");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<cplx, double>> out;
  for (int i = 0; i < n; ++i) {
    const cplx p = ctx.seeds[rng() % ctx.seeds.size()];
    const double t = uniform01(rng);
    const double r = ctx.eps0 * r_lo * std::pow(r_hi / r_lo, t);
    out.emplace_back(p, std::min(r, std::nextafter(ctx.eps0, 0.0)));
  }
  return out;
}

namespace {

struct DiskStats {
  std::vector<double> lx, ly;
  double slope = 0.0, intercept = 0.0;
  double r1 = INFINITY, c2 = 0.0, c3 = 0.0;
  int fold = 0;
  bool q_in_post = true;
  double diam = 0.0;
  int n = 0;
  long long k = 1;
  bool valid = true;
};

double seg_distance(cplx z, cplx a, cplx b) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  const double t = len2 > 0 ? std::clamp(((z - a) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
  return std::abs(z - (a + t * d));
}

DiskStats disk_stats(const ElevatorContext& ctx, cplx p, double r, std::uint64_t seed,
                     const DistortionOptions& o) {
  DiskStats s;
  const ElevatorResult e = elevate(ctx, p, r);
  s.diam = e.image_diameter;
  s.n = e.n;
  s.k = e.k;
  s.valid = e.valid();
  const int n = e.n;
  auto Fn = [&](cplx z) { return iterate_point(ctx.map, z, n); };
  std::mt19937_64 rng(seed);
  const double dB = 2.0 * r;

  auto random_in = [&](double radius) {
    return std::polar(radius * std::sqrt(uniform01(rng)), kTwoPi * uniform01(rng));
  };
  // (a) sub-disks and arcs.
  for (int t = 0; t < o.subdisks + o.arcs; ++t) {
    const double rho = r * 0.5 * std::pow(1e-3, uniform01(rng));
    const cplx c = p + random_in(r - rho);
    std::vector<cplx> img;
    double dA;
    if (t < o.subdisks) {
      for (int j = 0; j < 64; ++j) img.push_back(Fn(c + std::polar(rho, kTwoPi * j / 64)));
      dA = 2.0 * rho;
    } else {
      const double span = 0.3 + (std::numbers::pi - 0.3) * uniform01(rng);
      const double a0 = kTwoPi * uniform01(rng);
      for (int j = 0; j < 32; ++j) img.push_back(Fn(c + std::polar(rho, a0 + span * j / 31)));
      dA = 2.0 * rho * std::sin(span / 2);
    }
    const double dy = diameter(img);
    if (dy > 0.0 && dA > 0.0) {
      s.lx.push_back(std::log(dA / dB));
      s.ly.push_back(std::log(dy));
    }
  }
  if (s.lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < s.lx.size(); ++i) {
      mx += s.ly[i];
      my += s.lx[i];
    }
    mx /= s.lx.size();
    my /= s.lx.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < s.lx.size(); ++i) {
      sxx += (s.ly[i] - mx) * (s.ly[i] - mx);
      sxy += (s.ly[i] - mx) * (s.lx[i] - my);
    }
    s.slope = sxx > 0 ? sxy / sxx : 0.0;
    s.intercept = my - s.slope * mx;
  }

  // (b) inradius of f^n(B/2) about f^n(p).
  std::vector<cplx> half;
  for (int j = 0; j < 256; ++j) half.push_back(Fn(p + std::polar(0.5 * r, kTwoPi * j / 256)));
  const cplx fp = Fn(p);
  for (size_t j = 0; j < half.size(); ++j)
    s.r1 = std::min(s.r1, seg_distance(fp, half[j], half[(j + 1) % half.size()]));

  // (c) Lipschitz ratio over pairs.
  for (int t = 0; t < o.pairs; ++t) {
    const cplx u = p + random_in(r), v = p + random_in(r);
    const double d = std::abs(u - v);
    if (d > 0) s.c2 = std::max(s.c2, std::abs(Fn(u) - Fn(v)) * dB / d);
  }

  // (d) distinct points with equal images, around the branch point.
  if (e.branch_point && e.k >= 2) {
    const cplx x = *e.branch_point;
    for (int t = 0; t < o.fold_points; ++t) {
      const cplx u = p + random_in(r);
      const cplx target = Fn(u);
      for (long long j = 1; j < e.k; ++j) {
        cplx v = x + std::polar(1.0, kTwoPi * j / e.k) * (u - x);
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
          cplx w = v, d = 1.0;
          for (int i = 0; i < n; ++i) {
            d *= ctx.map.derivative(w);
            w = ctx.map.eval_finite(w);
          }
          const cplx g = w - target;
          if (std::abs(g) <= 1e-12 * std::max(1.0, std::abs(target))) {
            ok = true;
            break;
          }
          if (d == 0.0 || !std::isfinite(std::abs(d))) break;
          v -= g / d;
        }
        if (!ok || std::abs(v - p) > r || std::abs(v - u) <= 1e-9 * r) continue;
        ++s.fold;
        s.c3 = std::max(s.c3, std::abs(target - e.center) * dB / std::abs(u - v));
        s.q_in_post = s.q_in_post && contains_point(ctx.post, SpherePoint(e.center), 1e-9);
      }
    }
  }
  return s;
}

}  // namespace

DistortionStats distortion_stats(const ElevatorContext& ctx, int n_samples, std::uint64_t seed,
                                 const DistortionOptions& o) {
  if (n_samples < 1) throw PreconditionError("distortion_stats: need at least one sample");
  const auto disks = sample_disks(ctx, n_samples, seed, o.r_lo, o.r_hi);
  std::vector<DiskStats> per(disks.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(disks.size()); ++i)
    per[i] = disk_stats(ctx, disks[i].first, disks[i].second,
                        seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)), o);

  DistortionStats st;
  st.samples = n_samples;
  st.gamma = INFINITY;
  st.r1 = INFINITY;
  st.min_image_diameter = INFINITY;
  double ss = 0.0;
  long cnt = 0;
  for (const auto& s : per) {
    if (s.lx.size() >= 2) {
      st.gamma = std::min(st.gamma, s.slope);
      st.disk_gamma.push_back(s.slope);
      for (size_t i = 0; i < s.lx.size(); ++i) {
        const double res = s.lx[i] - (s.intercept + s.slope * s.ly[i]);
        ss += res * res;
        ++cnt;
      }
    }
    st.r1 = std::min(st.r1, s.r1);
    st.C2 = std::max(st.C2, s.c2);
    if (s.fold > 0) {
      st.fold_pairs += s.fold;
      st.C3 = std::max(st.C3.value_or(0.0), s.c3);
      st.q_in_post = st.q_in_post && s.q_in_post;
    }
    st.min_image_diameter = std::min(st.min_image_diameter, s.diam);
    st.max_image_diameter = std::max(st.max_image_diameter, s.diam);
    st.max_n = std::max(st.max_n, s.n);
    st.max_k = std::max(st.max_k, s.k);
    st.invalid += !s.valid;
  }
  st.fit_residual = cnt > 0 ? std::sqrt(ss / cnt) : 0.0;
  if (!std::isfinite(st.gamma)) st.gamma = 0.0;
  st.C1 = 0.0;
  for (const auto& s : per)
    for (size_t i = 0; i < s.lx.size(); ++i)
      st.C1 = std::max(st.C1, std::exp(s.lx[i] - st.gamma * s.ly[i]));
  double rmin = INFINITY, rmax = 0.0;
  for (const auto& d : disks) {
    rmin = std::min(rmin, d.second);
    rmax = std::max(rmax, d.second);
  }
  st.degenerate = st.disk_gamma.empty() || std::log(rmax / rmin) < 0.1;
  return st;
}

}  // namespace carpet
