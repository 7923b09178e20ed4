#include "carpet/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace carpet {

double relative_residual(const Polynomial& p, cplx z) {
  const double scale = p.magnitude(std::abs(z));
  if (scale == 0.0) return 0.0;
  return std::abs(p(z)) / scale;
}

namespace {

// Newton on the (m-1)th derivative, where a root of multiplicity m is simple.
cplx polish(const Polynomial& p, cplx z, int multiplicity) {
  Polynomial q = p;
  for (int i = 1; i < multiplicity; ++i) q = q.derivative();
  for (int it = 0; it < 4; ++it) {
    cplx v, dv;
    q.eval_with_derivative(z, v, dv);
    if (dv == cplx{}) break;
    const cplx step = v / dv;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    const cplx next = z - step;
    if (relative_residual(p, next) > relative_residual(p, z)) break;
    z = next;
  }
  return z;
}

std::vector<cplx> aberth(const Polynomial& p, int max_iterations) {
  const int n = p.degree();
  std::vector<cplx> z(n);
  if (n == 1) {
    z[0] = -p.coefficient(0) / p.coefficient(1);
    return z;
  }
  // Initial radius from the geometric mean of the roots; start points on a
  // circle with an irrational angular offset to avoid symmetric stalls.
  const double radius =
      std::pow(std::abs(p.coefficient(0) / p.leading()), 1.0 / static_cast<double>(n));
  const double r0 = (radius > 0.0 && std::isfinite(radius)) ? radius : 1.0;
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
    z[k] = std::polar(r0, angle);
  }

  std::vector<bool> done(n, false);
  for (int it = 0; it < max_iterations; ++it) {
    bool all_done = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      cplx v, dv;
      p.eval_with_derivative(z[i], v, dv);
      if (v == cplx{}) {
        done[i] = true;
        continue;
      }
      const cplx ratio = v / dv;
      cplx sum{};
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const cplx diff = z[i] - z[j];
        if (diff != cplx{}) sum += 1.0 / diff;
      }
      const cplx denom = 1.0 - ratio * sum;
      const cplx step = (denom == cplx{}) ? ratio : ratio / denom;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        // Perturb a stuck estimate rather than propagating NaN.
        z[i] += cplx(1e-3, 1e-3) * (1.0 + std::abs(z[i]));
        all_done = false;
        continue;
      }
      z[i] -= step;
      if (std::abs(step) <= 4e-16 * (1.0 + std::abs(z[i]))) {
        done[i] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return z;
}

}  // namespace

std::vector<Root> polynomial_roots(const Polynomial& p, const RootOptions& options) {
  if (p.is_zero()) throw PreconditionError("polynomial_roots: zero polynomial");
  std::vector<Root> out;
  if (p.degree() == 0) return out;

  // Split off exact roots at the origin.
  const auto& c = p.coefficients();
  int zeros = 0;
  while (c[zeros] == cplx{}) ++zeros;
  if (zeros > 0) out.push_back({cplx{}, zeros});
  const Polynomial reduced(std::vector<cplx>(c.begin() + zeros, c.end()));
  if (reduced.degree() == 0) return out;

  std::vector<cplx> raw = aberth(reduced, options.max_iterations);

  // Union-find clustering of estimates closer than merge_distance.
  const int n = static_cast<int>(raw.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(raw[i] - raw[j]) < options.merge_distance) parent[find(i)] = find(j);

  std::vector<Root> clusters;
  std::vector<int> owner(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (owner[r] < 0) {
      owner[r] = static_cast<int>(clusters.size());
      clusters.push_back({cplx{}, 0});
    }
    Root& cl = clusters[owner[r]];
    cl.z += raw[i];
    cl.multiplicity += 1;
  }

  for (Root& cl : clusters) {
    cl.z /= static_cast<double>(cl.multiplicity);
    cl.z = polish(reduced, cl.z, cl.multiplicity);
  }

  // Estimates of an m-fold root scatter like eps^(1/m), beyond merge_distance
  // for m >= 3. Nearby clusters are merged when the polished centroid is a
  // root of the combined multiplicity at the residual tolerance; two distinct
  // simple roots h apart leave a residual of order h^2, so this only merges
  // what merge_distance would have merged had the estimates been exact.
  bool merged = true;
  while (merged && clusters.size() > 1) {
    merged = false;
    for (size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        const Root& a = clusters[i];
        const Root& b = clusters[j];
        const double reach = 1e-3 * (1.0 + std::max(std::abs(a.z), std::abs(b.z)));
        if (std::abs(a.z - b.z) > reach) continue;
        const int m = a.multiplicity + b.multiplicity;
        const cplx c = (a.z * static_cast<double>(a.multiplicity) +
                        b.z * static_cast<double>(b.multiplicity)) /
                       static_cast<double>(m);
        const cplx z = polish(reduced, c, m);
        if (relative_residual(reduced, z) > options.residual_tol) continue;
        clusters[i] = {z, m};
        clusters.erase(clusters.begin() + static_cast<long>(j));
        merged = true;
      }
    }
  }

  double worst = 0.0;
  for (const Root& cl : clusters) worst = std::max(worst, relative_residual(reduced, cl.z));
  // A clustered root's residual scales like its error to the m-th power, so a
  // single tolerance covers simple and multiple roots alike.
  if (worst > options.residual_tol) {
    throw RootFindingError("polynomial_roots: residual " + std::to_string(worst) +
                               " above tolerance",
                           worst);
  }
  out.insert(out.end(), clusters.begin(), clusters.end());
  return out;
}

}  // namespace carpet
