#include "carpet/boettcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "carpet/parallel.hpp"

namespace carpet {

namespace {

MoebiusMap chart_at(const SpherePoint& p) {
  if (p.is_infinity()) return MoebiusMap(0.0, 1.0, 1.0, 0.0);
  return MoebiusMap(1.0, -p.value(), 0.0, 1.0);
}

// Lowest coefficient of the numerator that is significant relative to the
// largest one.
int lowest_order(const Polynomial& p) {
  const double scale = p.max_abs_coefficient();
  for (int i = 0; i <= p.degree(); ++i)
    if (std::abs(p.coefficient(i)) > 1e-12 * scale) return i;
  return p.degree();
}

}  // namespace

Boettcher::Boettcher(const RationalMap& f, const SpherePoint& p)
    : f_(f), p_(p), g_(RationalMap::power(2)) {
  if (f.degree() < 2) throw PreconditionError("boettcher: degree must be >= 2");
  if (chordal_distance(f(p), p) > 1e-9) throw PreconditionError("boettcher: point is not fixed");
  k_ = local_degree(f, p);
  if (k_ < 2) throw PreconditionError("boettcher: fixed point is not superattracting");
  const MoebiusMap m = chart_at(p);
  g_ = conjugate(f, m);
  const Polynomial& num = g_.numerator();
  const Polynomial& den = g_.denominator();
  if (lowest_order(num) != k_ || std::abs(den.coefficient(0)) == 0.0)
    throw PreconditionError("boettcher: local form is not a k-th power");
  a_ = num.coefficient(k_) / den.coefficient(0);
  // c^(k-1) = a, argument closest to 0.
  const double mod = std::pow(std::abs(a_), 1.0 / (k_ - 1));
  double arg = std::arg(a_) / (k_ - 1);
  const double step = 2.0 * std::numbers::pi / (k_ - 1);
  while (arg > 0.5 * step) arg -= step;
  while (arg <= -0.5 * step) arg += step;
  c_ = std::polar(mod, arg);
}

cplx Boettcher::coordinate(const SpherePoint& z) const {
  const SpherePoint w = chart_at(p_)(z);
  return w.is_infinity() ? cplx(INFINITY, INFINITY) : w.value();
}

bool Boettcher::psi(cplx zeta, cplx& out, int& iterations, bool& flagged,
                    std::string& error) const {
  flagged = false;
  iterations = 0;
  if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) {
    error = "orbit does not converge to the fixed point";
    return false;
  }
  if (zeta == cplx{}) {
    out = 0.0;
    return true;
  }
  // est_{n+1} = est_n * (zeta_{n+1} / (a zeta_n^k))^(1/k^(n+1)), the principal
  // root picking the k^(n+1)-th root of c zeta_{n+1} nearest est_n.
  cplx est = c_ * zeta;
  double power = 1.0;
  for (int n = 0; n < max_iter; ++n) {
    iterations = n + 1;
    power *= k_;
    if (std::abs(zeta) < 1e-150) {
      out = est;
      return true;
    }
    const SpherePoint next = g_(SpherePoint(zeta));
    if (next.is_infinity()) {
      error = "orbit does not converge to the fixed point";
      return false;
    }
    const cplx z1 = next.value();
    if (z1 == cplx{}) {
      out = est;
      return true;
    }
    const cplx ratio = z1 / (a_ * std::pow(zeta, k_));
    const double turn = std::arg(ratio) / power;
    if (std::abs(turn) * k_ > 0.4) flagged = true;
    const cplx step = std::polar(std::pow(std::abs(ratio), 1.0 / power), turn);
    est *= step;
    zeta = z1;
    if (std::abs(step - 1.0) < 1e-17) {
      out = est;
      return true;
    }
  }
  error = "orbit does not converge to the fixed point";
  return false;
}

BoettcherRow Boettcher::evaluate(const SpherePoint& z) const {
  BoettcherRow row;
  row.z = z;
  bool flag_a = false, flag_b = false;
  int it_b = 0;
  row.ok = psi(coordinate(z), row.psi, row.iterations, flag_a, row.error);
  if (!row.ok) return row;
  cplx image{};
  std::string err;
  if (!psi(coordinate(f_(z)), image, it_b, flag_b, err)) {
    row.ok = false;
    row.error = err;
    return row;
  }
  row.flagged = flag_a;
  row.residual = std::abs(image - std::pow(row.psi, k_));
  row.confidence = std::max(0.0, 1.0 - std::abs(row.psi));
  if (std::abs(row.psi) >= 1.0) {
    row.ok = false;
    row.error = "sample outside the immediate basin";
  }
  return row;
}

double BoettcherChart::max_residual() const {
  double worst = 0.0;
  for (const auto& r : rows)
    if (r.ok) worst = std::max(worst, r.residual);
  return worst;
}

int BoettcherChart::failed() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
}

BoettcherChart boettcher_chart(const RationalMap& f, const SpherePoint& p,
                               std::span<const SpherePoint> samples) {
  const Boettcher b(f, p);
  BoettcherChart chart;
  chart.point = p;
  chart.k = b.k();
  chart.scale = b.scale();
  chart.rows.resize(samples.size());
  const long m = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < m; ++i) chart.rows[i] = b.evaluate(samples[i]);
  return chart;
}

double conjugacy_residual(const RationalMap& f, std::span<const BoettcherRow> image,
                          std::span<const BoettcherRow> source, int k) {
  if (image.size() != source.size()) throw Error("conjugacy_residual: unmatched samples");
  double worst = 0.0;
  for (size_t i = 0; i < source.size(); ++i) {
    if (chordal_distance(f(source[i].z), image[i].z) > 1e-9)
      throw Error("conjugacy_residual: unmatched samples");
    if (!image[i].ok || !source[i].ok) throw Error("conjugacy_residual: invalid row");
    worst = std::max(worst, std::abs(image[i].psi - std::pow(source[i].psi, k)));
  }
  return worst;
}

namespace {

// Maps points to components of the standard raster, going through the
// inverted raster outside the window.
class Locator {
 public:
  explicit Locator(const Scene& scene) : scene_(scene) {
    const int n = scene.inverted.resolution();
    inv_to_std_.assign(scene.inv_comps.list.size(), -1);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const int inv = scene.inv_comps.map[scene.inverted.index(x, y)];
        if (inv < 0 || inv_to_std_[inv] >= 0) continue;
        int a, b;
        if (!scene.grid.locate(scene.inverted.pixel_point(x, y), a, b)) continue;
        inv_to_std_[inv] = scene.comps.map[scene.grid.index(a, b)];
      }
  }

  int operator()(const SpherePoint& p) const {
    int i, j;
    if (scene_.grid.locate(p, i, j)) return scene_.comps.map[scene_.grid.index(i, j)];
    if (scene_.inverted.resolution() == 0 || !scene_.inverted.locate(p, i, j)) return -1;
    const int inv = scene_.inv_comps.map[scene_.inverted.index(i, j)];
    return inv < 0 ? -1 : inv_to_std_[inv];
  }

 private:
  const Scene& scene_;
  std::vector<int> inv_to_std_;
};

SpherePoint basepoint_with(const RationalMap& f, const Locator& where, int component,
                           std::span<const FatouComponentRecord> known, const OrbitReport& report);

}  // namespace

int component_of(const Scene& scene, const SpherePoint& p) { return Locator(scene)(p); }

namespace {

// Majority image over interior pixels of the component.
int image_component(const RationalMap& f, const Scene& scene, const Locator& where, int id) {
  const RasterGrid& g = scene.grid;
  const Component& c = scene.comps.list[id];
  const int n = g.resolution();
  std::vector<size_t> interior;
  for (int j = c.j0; j <= c.j1; ++j)
    for (int i = c.i0; i <= c.i1; ++i) {
      if (scene.comps.map[g.index(i, j)] != id) continue;
      bool inner = true;
      for (int dj = -1; dj <= 1 && inner; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int x = i + di, y = j + dj;
          if (x < 0 || y < 0 || x >= n || y >= n) continue;
          if (g.julia[g.index(x, y)]) {
            inner = false;
            break;
          }
        }
      if (inner) interior.push_back(g.index(i, j));
    }
  if (interior.empty())
    for (int j = c.j0; j <= c.j1; ++j)
      for (int i = c.i0; i <= c.i1; ++i)
        if (scene.comps.map[g.index(i, j)] == id) interior.push_back(g.index(i, j));
  const size_t stride = std::max<size_t>(1, interior.size() / 64);
  std::map<int, int> votes;
  for (size_t s = 0; s < interior.size(); s += stride) {
    const size_t k = interior[s];
    const int target = where(f(g.pixel_point(static_cast<int>(k % n), static_cast<int>(k / n))));
    if (target >= 0) ++votes[target];
  }
  int best = -1, count = 0;
  for (const auto& [t, v] : votes)
    if (v > count) {
      best = t;
      count = v;
    }
  return best;
}

}  // namespace

namespace {

SpherePoint basepoint_with(const RationalMap& f, const Locator& where, int component,
                           std::span<const FatouComponentRecord> known, const OrbitReport& report) {
  const FatouComponentRecord* self = nullptr;
  for (const auto& r : known)
    if (r.component == component) self = &r;
  if (self == nullptr || self->level < 0) throw Error("basepoint: component level unknown");
  std::vector<SpherePoint> found;
  if (self->level == 0) {
    for (const auto& cyc : report.attracting_cycles())
      for (const auto& q : cyc.points)
        if (where(q) == component) found.push_back(q);
  } else {
    const FatouComponentRecord* img = nullptr;
    for (const auto& r : known)
      if (r.component == self->image) img = &r;
    if (img == nullptr || !img->valid) throw Error("basepoint: image basepoint unknown");
    for (const auto& pre : preimages(f, img->basepoint))
      if (where(pre.point) == component) found.push_back(pre.point);
  }
  if (found.size() != 1)
    throw Error("basepoint: " + std::to_string(found.size()) +
                " candidate points in component (raster too coarse)");
  return found[0];
}

}  // namespace

SpherePoint basepoint(const RationalMap& f, const Scene& scene, int component,
                      std::span<const FatouComponentRecord> known, const OrbitReport& report) {
  return basepoint_with(f, Locator(scene), component, known, report);
}

std::vector<FatouComponentRecord> fatou_records(const RationalMap& f, const Scene& scene,
                                                const OrbitReport& report, int min_pixels) {
  const int m = static_cast<int>(scene.comps.list.size());
  std::vector<int> ids;
  for (const auto& c : scene.comps.list)
    if (c.pixels >= min_pixels) ids.push_back(c.id);
  std::vector<FatouComponentRecord> rec(m);
  const Locator where(scene);
  const int count = static_cast<int>(ids.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (int t = 0; t < count; ++t) {
    rec[ids[t]].component = ids[t];
    rec[ids[t]].image = image_component(f, scene, where, ids[t]);
  }
  // Levels: periodic components first, then by distance to a periodic one.
  for (int id : ids) {
    int cur = id;
    std::vector<int> path;
    while (cur >= 0 && std::find(path.begin(), path.end(), cur) == path.end() &&
           static_cast<int>(path.size()) <= m) {
      path.push_back(cur);
      cur = rec[cur].component >= 0 ? rec[cur].image : -1;
    }
    if (cur < 0) {
      rec[id].error = "image component unknown";
      continue;
    }
    const auto loop = std::find(path.begin(), path.end(), cur);
    rec[id].level = static_cast<int>(loop - path.begin());
  }
  int top = 0;
  for (int id : ids) top = std::max(top, rec[id].level);
  for (int level = 0; level <= top; ++level) {
    std::vector<int> batch;
    for (int id : ids)
      if (rec[id].level == level) batch.push_back(id);
    const int b = static_cast<int>(batch.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < b; ++t) {
      FatouComponentRecord& r = rec[batch[t]];
      try {
        r.basepoint = basepoint_with(f, where, r.component, rec, report);
        r.exponent = local_degree(report.critical, r.basepoint);
        r.valid = true;
      } catch (const Error& e) {
        r.error = e.what();
      }
    }
  }
  std::vector<FatouComponentRecord> out;
  for (int id : ids) out.push_back(rec[id]);
  return out;
}

RotationResult rotation_solve(std::span<const RotationSample> samples, int k, int l, int n,
                              double tol) {
  if (k < 2) throw PreconditionError("rotation_solve: k must be >= 2");
  if (n < 1 || l < 1) throw PreconditionError("rotation_solve: exponents must be positive");
  if (samples.size() < 3) throw PreconditionError("rotation_solve: needs at least 3 samples");
  std::vector<RotationSample> s(samples.begin(), samples.end());
  auto angle = [](cplx z) {
    double t = std::arg(z);
    return t < 0.0 ? t + 2.0 * std::numbers::pi : t;
  };
  std::sort(s.begin(), s.end(),
            [&](const RotationSample& x, const RotationSample& y) { return angle(x.z) < angle(y.z); });
  // Orientation preserving: each step of arg phi turns forward and the total
  // is one full turn.
  double total = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double step = std::arg(s[(i + 1) % s.size()].phi / s[i].phi);
    if (step <= 0.0) throw PreconditionError("rotation_solve: phi is not monotone");
    total += step;
  }
  if (std::abs(total - 2.0 * std::numbers::pi) > 1e-6)
    throw PreconditionError("rotation_solve: phi is not monotone");

  RotationResult r;
  cplx mean{};
  for (const auto& x : s) mean += x.phi / x.z;
  r.a = mean / std::abs(mean);
  for (const auto& x : s) r.fit_residual = std::max(r.fit_residual, std::abs(x.phi - r.a * x.z));

  // phi(w) for |w| = 1 by linear interpolation in the argument.
  std::vector<double> args(s.size());
  for (size_t i = 0; i < s.size(); ++i) args[i] = angle(s[i].z);
  auto phi_at = [&](cplx w) {
    const double t = angle(w);
    const size_t hi = static_cast<size_t>(std::upper_bound(args.begin(), args.end(), t) - args.begin());
    const size_t i1 = hi % s.size();
    const size_t i0 = (hi + s.size() - 1) % s.size();
    double span = args[i1] - args[i0];
    double off = t - args[i0];
    if (span <= 0.0) span += 2.0 * std::numbers::pi;
    if (off < 0.0) off += 2.0 * std::numbers::pi;
    if (off == 0.0) return s[i0].phi;
    const double turn = std::arg(s[i1].phi / s[i0].phi);
    return s[i0].phi * std::polar(1.0, turn * off / span);
  };
  for (const auto& x : s)
    r.equation_residual =
        std::max(r.equation_residual, std::abs(std::pow(x.phi, l) - std::pow(phi_at(std::pow(x.z, k)), n)));
  r.root_residual = std::abs(std::pow(r.a, n * (k - 1)) - 1.0);

  if (l != n * k) {
    r.reason = "degree";
  } else if (r.fit_residual > tol || r.equation_residual > tol) {
    r.reason = "residual";
  } else if (r.root_residual > tol) {
    r.reason = "root";
  } else {
    r.compatible = true;
  }
  return r;
}

}  // namespace carpet
