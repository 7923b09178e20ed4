#include "carpet/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "carpet/elevator.hpp"
#include "carpet/parallel.hpp"

namespace carpet {

namespace {

constexpr double kPrefilter = 0.1;
constexpr int kRefineRounds = 6;
constexpr long kAnchorPixels = 64;
constexpr size_t kScreenProbes = 256;

SpherePoint from_inverted(cplx w) {
  if (std::abs(w) < 1e-300) return SpherePoint::infinity();
  return SpherePoint(1.0 / w);
}

cplx polygon_centroid(std::span<const cplx> v) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const cplx p = v[i], q = v[(i + 1) % v.size()];
    const double cr = p.real() * q.imag() - q.real() * p.imag();
    a += cr;
    cx += (p.real() + q.real()) * cr;
    cy += (p.imag() + q.imag()) * cr;
  }
  if (a == 0.0) {
    cplx s{};
    for (cplx z : v) s += z;
    return s / static_cast<double>(v.size());
  }
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

bool distinct(const std::array<SpherePoint, 3>& t) {
  return chordal_distance(t[0], t[1]) > 1e-9 && chordal_distance(t[0], t[2]) > 1e-9 &&
         chordal_distance(t[1], t[2]) > 1e-9;
}

bool is_identity(const MoebiusMap& m) {
  return moebius_distance(m, MoebiusMap::identity()) <= kGroupMatchTol;
}

int find_match(const std::vector<MoebiusMap>& set, const MoebiusMap& m, double tol) {
  for (size_t i = 0; i < set.size(); ++i)
    if (moebius_distance(set[i], m) <= tol) return static_cast<int>(i);
  return -1;
}

double one_sided(const MoebiusMap& xi, const JuliaSamples& from, const JuliaSamples& to) {
  double worst = 0.0;
  const long n = static_cast<long>(from.probes.size());
#pragma omp parallel for reduction(max : worst) if (n >= 1024 && !omp_in_parallel())
  for (long i = 0; i < n; ++i) {
    const SpherePoint y = xi(SpherePoint(from.probes[i]));
    const double d = y.is_infinity() ? std::numeric_limits<double>::infinity()
                                     : to.cloud.distance(y.value()) / to.pixel;
    worst = std::max(worst, d);
  }
  return worst;
}

double screen_score(const MoebiusMap& xi, const JuliaSamples& samples, size_t count) {
  double worst = 0.0;
  for (size_t i = 0; i < std::min(count, samples.probes.size()); ++i) {
    const cplx x = samples.probes[i];
    const SpherePoint y = xi(SpherePoint(x));
    if (y.is_infinity()) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, samples.cloud.distance(y.value()) / samples.pixel);
  }
  return worst;
}

double displacement(const MoebiusMap& xi, std::span<const cplx> probes) {
  double worst = 0.0;
  for (cplx p : probes) worst = std::max(worst, chordal_distance(xi(SpherePoint(p)), SpherePoint(p)));
  return worst;
}

long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

SpherePoint iterate_sphere(const RationalMap& f, SpherePoint z, int n) {
  for (int i = 0; i < n; ++i) z = f(z);
  return z;
}

}  // namespace

SpherePoint curve_centroid(const PeripheralCurve& curve) {
  if (curve.vertices.size() < 3) throw PreconditionError("curve_centroid: fewer than 3 vertices");
  if (!curve.traced_inverted) return SpherePoint(polygon_centroid(curve.vertices));
  std::vector<cplx> w;
  w.reserve(curve.vertices.size());
  for (cplx z : curve.vertices) w.push_back(1.0 / z);
  return from_inverted(polygon_centroid(w));
}

std::vector<SpherePoint> landmarks(std::span<const PeripheralCurve> curves, int count) {
  std::vector<size_t> idx(curves.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return curves[a].diameter > curves[b].diameter;
  });
  std::vector<SpherePoint> out;
  for (size_t i = 0; i < idx.size() && static_cast<int>(out.size()) < count; ++i)
    out.push_back(curve_centroid(curves[idx[i]]));
  return out;
}

std::vector<MoebiusMap> candidate_symmetries(std::span<const SpherePoint> L, double dedup) {
  if (L.size() < 3) throw PreconditionError("candidate_symmetries: need at least 3 landmarks");
  const int n = static_cast<int>(L.size());
  std::vector<MoebiusMap> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const std::array<SpherePoint, 3> src = {L[i], L[j], L[k]};
        if (!distinct(src)) continue;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
              if (a == b || a == c || b == c) continue;
              const std::array<SpherePoint, 3> dst = {L[a], L[b], L[c]};
              if (!distinct(dst)) continue;
              for (bool rev : {false, true}) {
                const MoebiusMap m = MoebiusMap::from_triples(src, dst, rev).normalized();
                if (find_match(out, m, dedup) < 0) out.push_back(m);
              }
            }
      }
  return out;
}

std::vector<MoebiusMap> candidate_symmetries(std::span<const PeripheralCurve> curves,
                                             int landmark_count, double dedup) {
  if (curves.size() < 3) throw PreconditionError("candidate_symmetries: need at least 3 curves");
  if (landmark_count < 3) throw PreconditionError("candidate_symmetries: need at least 3 landmarks");
  const auto L = landmarks(curves, landmark_count);
  return candidate_symmetries(std::span<const SpherePoint>(L), dedup);
}

JuliaSamples julia_samples(std::vector<cplx> points, double pixel, int probes, std::uint64_t seed) {
  if (points.empty()) throw PreconditionError("julia_samples: no points");
  JuliaSamples s;
  s.pixel = pixel;
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  const size_t take = std::min(points.size(), static_cast<size_t>(std::max(probes, 1)));
  for (size_t i = 0; i < take; ++i) {
    const size_t j = i + rng() % (order.size() - i);
    std::swap(order[i], order[j]);
    s.probes.push_back(points[order[i]]);
  }
  s.cloud = PointIndex(std::move(points));
  return s;
}

JuliaSamples julia_samples(const RasterGrid& grid, const RationalMap& f, int probes,
                           std::uint64_t seed) {
  if (grid.window().inverted)
    throw PreconditionError("julia_samples: samples are taken from a standard-chart raster");
  std::vector<cplx> pts;
  const int n = grid.resolution();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!grid.julia[grid.index(i, j)]) continue;
      const SpherePoint p = grid.pixel_point(i, j);
      if (p.is_finite()) pts.push_back(p.value());
    }
  JuliaSamples s;
  s.pixel = grid.pixel_size();
  s.probes = backward_orbit_points(f, probes, seed);
  pts.insert(pts.end(), s.probes.begin(), s.probes.end());
  s.cloud = PointIndex(std::move(pts));
  return s;
}

double moebius_stretch(const MoebiusMap& xi, cplx z) {
  const cplx w = xi.orientation_reversing() ? std::conj(z) : z;
  const double den = std::norm(xi.c() * w + xi.d());
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(xi.determinant()) / den;
}

InvarianceScore verify_invariance(const MoebiusMap& xi, const JuliaSamples& from,
                                  const JuliaSamples& to, double tol_pixels) {
  InvarianceScore s;
  s.score = std::max(one_sided(xi, from, to), one_sided(xi.inverse(), to, from));
  s.accepted = s.score <= tol_pixels;
  return s;
}

RefinedMap refine_symmetry(const MoebiusMap& xi, std::span<const SpherePoint> anchors,
                           double pair_tol) {
  RefinedMap r{xi.normalized()};
  double tol = pair_tol;
  for (int round = 0; round < kRefineRounds; ++round, tol *= 0.25) {
    std::vector<SpherePoint> src, dst;
    std::vector<char> taken(anchors.size(), 0);
    for (const auto& a : anchors) {
      const SpherePoint img = r.map(a);
      double best = INFINITY, second = INFINITY;
      size_t pick = 0;
      for (size_t j = 0; j < anchors.size(); ++j) {
        const double d = chordal_distance(img, anchors[j]);
        if (d < best) {
          second = best;
          best = d;
          pick = j;
        } else {
          second = std::min(second, d);
        }
      }
      if (best <= tol && second >= 2.0 * best && !taken[pick]) {
        taken[pick] = 1;
        src.push_back(a);
        dst.push_back(anchors[pick]);
      }
    }
    r.pairs = static_cast<int>(src.size());
    if (src.size() < 4) {
      r.residual = INFINITY;
      r.exact = false;
      return r;
    }
    r.map = fit_moebius(src, dst, xi.orientation_reversing()).normalized();
    r.residual = 0.0;
    for (size_t i = 0; i < src.size(); ++i)
      r.residual = std::max(r.residual, chordal_distance(r.map(src[i]), dst[i]));
    if (r.residual < 1e-9) break;
  }
  r.exact = r.residual < 1e-9;
  return r;
}

SymmetryGroup group_closure(std::span<const MoebiusMap> accepted, const JuliaSamples& samples,
                            int budget, double tol_pixels) {
  SymmetryGroup g;
  auto add = [&](const MoebiusMap& m, double score) {
    g.elements.push_back(m.normalized());
    g.scores.push_back(score);
  };
  add(MoebiusMap::identity(), 0.0);
  std::vector<MoebiusMap> seeds;
  for (const auto& m : accepted) {
    seeds.push_back(m);
    seeds.push_back(m.inverse());
  }
  auto finish = [&](const std::string& verdict) {
    g.verdict = verdict;
    g.closed = verdict == "closed";
    g.order = static_cast<int>(g.elements.size());
    return g;
  };
  for (const auto& m : seeds) {
    if (find_match(g.elements, m, kGroupMatchTol) >= 0) continue;
    if (static_cast<int>(g.elements.size()) >= budget) return finish("closure not reached");
    const InvarianceScore s = verify_invariance(m, samples, tol_pixels);
    if (!s.accepted) return finish("product rejected");
    add(m, s.score);
  }
  for (bool grew = true; grew;) {
    grew = false;
    for (size_t i = 0; i < g.elements.size(); ++i)
      for (size_t j = 0; j < g.elements.size(); ++j) {
        const MoebiusMap p = (g.elements[i] * g.elements[j]).normalized();
        if (find_match(g.elements, p, kGroupMatchTol) >= 0) continue;
        if (static_cast<int>(g.elements.size()) >= budget) return finish("closure not reached");
        const InvarianceScore s = verify_invariance(p, samples, tol_pixels);
        if (!s.accepted) return finish("product rejected");
        add(p, s.score);
        grew = true;
      }
  }
  const size_t n = g.elements.size();
  g.table.assign(n, std::vector<int>(n, -1));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      g.table[i][j] = find_match(g.elements, g.elements[i] * g.elements[j], kGroupMatchTol);
  g.delta0 = n > 1 ? INFINITY : 0.0;
  for (size_t i = 0; i < n; ++i)
    if (!is_identity(g.elements[i])) g.delta0 = std::min(g.delta0, displacement(g.elements[i], samples.probes));
  return finish("closed");
}

FunctionalSearch functional_equation_search(const RationalMap& f, const RationalMap& g,
                                            const MoebiusMap& xi, const JuliaSamples& f_samples,
                                            const JuliaSamples& g_samples, int max_exp,
                                            double tol_pixels, int probes) {
  if (max_exp > 6) throw PreconditionError("functional_equation_search: max_exp must be <= 6");
  FunctionalSearch out;
  out.tolerance = tol_pixels * g_samples.pixel;
  const InvarianceScore pre = verify_invariance(xi, f_samples, g_samples, tol_pixels);
  out.precheck = pre.accepted;
  out.precheck_score = pre.score;
  if (!pre.accepted) return out;

  const size_t count = std::min(f_samples.probes.size(), static_cast<size_t>(std::max(probes, 1)));
  const std::span<const cplx> zs(f_samples.probes.data(), count);
  for (int mp = 2; mp <= max_exp; ++mp)
    for (int m = 1; m < mp; ++m)
      for (int n = 1; n <= max_exp; ++n) {
        if (ipow(g.degree(), mp - m) != ipow(f.degree(), n)) continue;
        FunctionalRelation rel{mp, m, n, 0.0, true};
        for (cplx z : zs) {
          const SpherePoint lhs = iterate_sphere(g, xi(SpherePoint(z)), mp);
          const SpherePoint rhs = iterate_sphere(g, xi(iterate_sphere(f, SpherePoint(z), n)), m);
          rel.residual = std::max(rel.residual, chordal_distance(lhs, rhs));
        }
        if (rel.residual < out.tolerance) out.relations.push_back(rel);
      }
  for (const auto& r : out.relations)
    if (r.n == 1 && r.m_prime == r.m + 1 && (!out.reduced_l || r.m < *out.reduced_l))
      out.reduced_l = r.m;
  return out;
}

SymmetryReport detect_symmetries(const RationalMap& f, const Scene& scene,
                                 const OrbitReport& report, const SymmetryOptions& o) {
  SymmetryReport rep;
  const auto curves = trace_all(scene);
  const JuliaSamples samples = julia_samples(scene.grid, f);

  const auto records = fatou_records(f, scene, report);
  std::vector<size_t> by_size;
  for (size_t i = 0; i < records.size(); ++i)
    if (records[i].valid && scene.comps.list[records[i].component].pixels >= kAnchorPixels)
      by_size.push_back(i);
  std::stable_sort(by_size.begin(), by_size.end(), [&](size_t a, size_t b) {
    return scene.comps.list[records[a].component].pixels >
           scene.comps.list[records[b].component].pixels;
  });
  std::vector<SpherePoint> anchors, L;
  for (size_t i : by_size) anchors.push_back(records[i].basepoint);
  for (size_t i = 0; i < anchors.size() && static_cast<int>(L.size()) < o.landmark_count; ++i)
    L.push_back(anchors[i]);
  const bool basepoint_landmarks = L.size() >= 3;
  if (!basepoint_landmarks) L = landmarks(curves, o.landmark_count);
  rep.landmarks = L;
  const auto cands = candidate_symmetries(std::span<const SpherePoint>(L));
  rep.candidates = static_cast<int>(cands.size());

  // A symmetry permutes the Fatou components, so landmarks must land on targets.
  std::vector<SpherePoint> targets = anchors;
  if (!basepoint_landmarks)
    for (const auto& c : curves) targets.push_back(curve_centroid(c));
  std::vector<char> plausible(cands.size(), 0);
  std::vector<RefinedMap> refined(cands.size(), RefinedMap{MoebiusMap::identity()});
  std::vector<InvarianceScore> scores(cands.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(cands.size()); ++i) {
    bool ok = true;
    for (const auto& l : L) {
      double best = INFINITY;
      for (const auto& t : targets) best = std::min(best, chordal_distance(cands[i](l), t));
      ok = ok && best <= kPrefilter;
    }
    if (!ok) continue;
    refined[i] = refine_symmetry(cands[i], anchors);
    const MoebiusMap& m = refined[i].exact ? refined[i].map : cands[i];
    // A subset of probes bounds the score from below.
    if (screen_score(m, samples, kScreenProbes) > o.tol_pixels) continue;
    plausible[i] = 1;
    scores[i] = verify_invariance(m, samples, o.tol_pixels);
  }

  std::vector<MoebiusMap> generators;
  for (size_t i = 0; i < cands.size(); ++i) {
    if (!plausible[i] || !scores[i].accepted) continue;
    const MoebiusMap use = refined[i].exact ? refined[i].map : cands[i];
    rep.accepted.push_back(use);
    rep.accepted_scores.push_back(scores[i]);
    rep.refined.push_back(refined[i]);
    if (find_match(generators, use, kGroupMatchTol) < 0) generators.push_back(use);
  }
  rep.group = group_closure(generators, samples, o.budget, o.tol_pixels);
  rep.caveat = std::string("candidates permute the ") +
               (basepoint_landmarks ? "basepoints of the " : "centroids of the ") +
               std::to_string(L.size()) +
               " largest Fatou components; symmetries moving only smaller components among "
               "themselves are not enumerated";
  return rep;
}

}  // namespace carpet
