#include "carpet/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carpet/roots.hpp"

namespace carpet {

std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::Superattracting: return "superattracting";
    case CycleClass::Attracting: return "attracting";
    case CycleClass::Repelling: return "repelling";
    case CycleClass::Indifferent: return "indifferent";
  }
  return "unknown";
}

std::string to_string(OrbitTail::Kind k) {
  switch (k) {
    case OrbitTail::Kind::Finite: return "finite";
    case OrbitTail::Kind::Attracted: return "attracted";
    case OrbitTail::Kind::Unresolved: return "unresolved";
  }
  return "unknown";
}

bool contains_point(std::span<const SpherePoint> set, const SpherePoint& p, double tol) {
  return std::any_of(set.begin(), set.end(),
                     [&](const SpherePoint& q) { return chordal_distance(p, q) < tol; });
}

CycleInfo classify_cycle(const RationalMap& f, std::span<const SpherePoint> cycle) {
  if (cycle.empty()) throw PreconditionError("classify_cycle: empty cycle");
  const size_t p = cycle.size();
  double mult = 1.0;
  for (size_t i = 0; i < p; ++i) {
    const ChartJet j = f.jet(cycle[i]);
    if (chordal_distance(j.image, cycle[(i + 1) % p]) >= 1e-6)
      throw PreconditionError("classify_cycle: points do not form a cycle");
    // Spherical derivatives telescope around a cycle to |multiplier|.
    mult *= j.spherical_derivative;
  }
  CycleInfo out;
  out.points.assign(cycle.begin(), cycle.end());
  out.period = static_cast<int>(p);
  out.multiplier = mult;
  if (mult < 1e-9) {
    out.cls = CycleClass::Superattracting;
  } else if (mult < 1.0 - 1e-9) {
    out.cls = CycleClass::Attracting;
  } else if (mult > 1.0 + 1e-9) {
    out.cls = CycleClass::Repelling;
  } else {
    out.cls = CycleClass::Indifferent;
  }
  return out;
}

namespace {

cplx coordinate(const SpherePoint& z, bool inverted) {
  if (!inverted) return z.value();
  return z.is_infinity() ? cplx{} : 1.0 / z.value();
}

// Value and derivative of f^p read in the chart of the starting point.
bool iterate_in_chart(const RationalMap& f, const SpherePoint& x, int p, cplx& u, cplx& g,
                      cplx& dg) {
  bool inv0 = false;
  u = x.chart(inv0);
  SpherePoint z = x;
  cplx deriv = 1.0;
  bool jet_inv = inv0;
  for (int i = 0; i < p; ++i) {
    const ChartJet j = f.jet(z);
    deriv *= j.derivative;
    z = j.image;
    jet_inv = j.image_inverted;
  }
  if (jet_inv != inv0) {
    if (z.is_infinity() || z.value() == cplx{}) return false;
    const cplx v = coordinate(z, jet_inv);
    deriv *= -1.0 / (v * v);
  } else if (!inv0 && z.is_infinity()) {
    return false;
  }
  g = coordinate(z, inv0);
  dg = deriv;
  return std::isfinite(std::abs(g)) && std::isfinite(std::abs(dg));
}

SpherePoint from_chart(cplx u, bool inverted) {
  if (!inverted) return SpherePoint(u);
  if (u == cplx{}) return SpherePoint::infinity();
  return SpherePoint(1.0 / u);
}

// Newton on f^p(x) = x in x's chart.
SpherePoint refine_cycle_point(const RationalMap& f, SpherePoint x, int p) {
  for (int it = 0; it < 60; ++it) {
    bool inv = false;
    x.chart(inv);
    cplx u, g, dg;
    if (!iterate_in_chart(f, x, p, u, g, dg)) break;
    const cplx denom = dg - 1.0;
    if (std::abs(denom) < 1e-14) break;
    const cplx step = (g - u) / denom;
    if (!std::isfinite(std::abs(step))) break;
    const SpherePoint next = from_chart(u - step, inv);
    const double moved = chordal_distance(next, x);
    x = next;
    if (moved < 1e-16) break;
  }
  return x;
}

// Chordal distance from a cycle point to the nearest preimage of its image
// other than itself. An orbit that lands exactly on the cycle arrives from
// such a preimage; one converging along the cycle stays close to the cycle.
double landing_radius(const RationalMap& f, const SpherePoint& prev, const SpherePoint& next) {
  double r = std::numeric_limits<double>::infinity();
  for (const Preimage& p : preimages(f, next)) {
    const double d = chordal_distance(p.point, prev);
    if (d > 1e-6) r = std::min(r, d);
  }
  return r;
}

}  // namespace

OrbitTail orbit_tail(const RationalMap& f, const SpherePoint& z0, int max_iter, double tol,
                     double exact_tol) {
  if (max_iter < 1) throw PreconditionError("orbit_tail: max_iter must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("orbit_tail: tol must be positive");
  OrbitTail out;
  std::vector<SpherePoint> orbit{z0};
  orbit.reserve(64);
  for (int j = 1; j <= max_iter; ++j) {
    const SpherePoint z = f(orbit.back());
    orbit.push_back(z);
    int match = -1;
    for (int i = j - 1; i >= 0; --i) {
      if (chordal_distance(orbit[i], z) < tol) {
        match = i;
        break;
      }
    }
    if (match < 0) continue;

    int period = j - match;
    const SpherePoint start = refine_cycle_point(f, z, period);
    std::vector<SpherePoint> cycle{start};
    for (int k = 1; k < period; ++k) cycle.push_back(f(cycle.back()));
    // Minimal period of the refined cycle.
    for (int q = 1; q < period; ++q) {
      if (period % q == 0 && chordal_distance(cycle[q], start) < exact_tol) {
        cycle.resize(q);
        period = q;
        break;
      }
    }
    out.period = period;

    int landing = -1;
    for (int m = 0; m <= j; ++m) {
      if (contains_point(cycle, orbit[m], exact_tol)) {
        landing = m;
        break;
      }
    }
    if (landing > 0) {
      size_t k = 0;
      while (chordal_distance(cycle[k], orbit[landing]) >= exact_tol) ++k;
      const SpherePoint& prev = cycle[(k + cycle.size() - 1) % cycle.size()];
      if (chordal_distance(orbit[landing - 1], prev) < 0.5 * landing_radius(f, prev, cycle[k]))
        landing = -1;
    }
    if (landing >= 0) {
      out.kind = OrbitTail::Kind::Finite;
      out.preperiod = landing;
      // Rotate the cycle so it starts where the orbit lands.
      size_t k0 = 0;
      double best = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < cycle.size(); ++k) {
        const double d = chordal_distance(cycle[k], orbit[landing]);
        if (d < best) {
          best = d;
          k0 = k;
        }
      }
      std::rotate(cycle.begin(), cycle.begin() + static_cast<long>(k0), cycle.end());
    } else {
      out.kind = OrbitTail::Kind::Attracted;
      out.preperiod = match;
    }
    out.cycle = std::move(cycle);
    orbit.resize(std::min<size_t>(orbit.size(), out.preperiod + out.period + 1));
    out.orbit = std::move(orbit);
    return out;
  }
  out.kind = OrbitTail::Kind::Unresolved;
  return out;
}

long long orbit_local_degree(const RationalMap& f, std::span<const CriticalPoint> critical,
                             const SpherePoint& q, int n) {
  if (n < 1) throw PreconditionError("orbit_local_degree: n must be >= 1");
  long long k = 1;
  SpherePoint z = q;
  std::vector<int> seen(critical.size(), 0);
  bool repeated = false;
  for (int i = 0; i < n; ++i) {
    for (size_t c = 0; c < critical.size(); ++c) {
      if (chordal_distance(critical[c].point, z) < 1e-6) {
        k *= critical[c].local_degree;
        if (++seen[c] > 1) repeated = true;
        break;
      }
    }
    z = f(z);
  }
  if (!repeated && !critical.empty() && k > degree_bound_N(critical))
    throw Error("orbit_local_degree: product exceeds N(f) without repeating a critical point");
  return k;
}

long long orbit_local_degree(const RationalMap& f, const SpherePoint& q, int n) {
  if (f.degree() < 2) return 1;
  const auto crit = critical_points(f);
  return orbit_local_degree(f, crit, q, n);
}

long long degree_bound_N(std::span<const CriticalPoint> critical) {
  long long n = 1;
  for (const auto& c : critical) n *= c.local_degree;
  return n;
}

long long degree_bound_N(const RationalMap& f) {
  const auto crit = critical_points(f);
  return degree_bound_N(crit);
}

std::vector<CycleInfo> OrbitReport::attracting_cycles() const {
  std::vector<CycleInfo> out;
  for (const auto& c : cycles)
    if (c.attracting()) out.push_back(c);
  return out;
}

OrbitReport postcritical_report(const RationalMap& f, int budget,
                                const OrbitTolerances& tolerances) {
  if (f.degree() < 2) throw PreconditionError("postcritical_report: degree must be at least 2");
  if (!(tolerances.revisit > 0.0 && tolerances.exact > 0.0 && tolerances.root > 0.0))
    throw PreconditionError("postcritical_report: tolerances must be positive");
  OrbitReport rep;
  rep.degree = f.degree();
  rep.budget = budget;
  rep.tolerances = tolerances;
  RootOptions roots;
  roots.residual_tol = tolerances.root;
  rep.critical = critical_points(f, roots);
  rep.degree_bound = degree_bound_N(rep.critical);
  const double tol = rep.tolerances.revisit;
  const double same = 1e-8;

  std::vector<OrbitTail> tails(rep.critical.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(rep.critical.size()); ++i)
    tails[i] = orbit_tail(f, rep.critical[i].point, budget, tol, rep.tolerances.exact);

  rep.post_finite = true;
  for (size_t i = 0; i < rep.critical.size(); ++i) {
    CriticalOrbit co{rep.critical[i], tails[i], std::nullopt, false, false};
    const OrbitTail& t = co.tail;
    if (t.kind == OrbitTail::Kind::Unresolved) {
      rep.post_finite = false;
      if (!rep.offending_critical) rep.offending_critical = static_cast<int>(i);
      rep.orbits.push_back(co);
      continue;
    }
    // Match or register the terminal cycle.
    int idx = -1;
    for (size_t c = 0; c < rep.cycles.size(); ++c) {
      if (static_cast<int>(rep.cycles[c].points.size()) == t.period &&
          contains_point(rep.cycles[c].points, t.cycle.front(), same)) {
        idx = static_cast<int>(c);
        break;
      }
    }
    if (idx < 0) {
      rep.cycles.push_back(classify_cycle(f, t.cycle));
      idx = static_cast<int>(rep.cycles.size()) - 1;
    }
    co.cycle_index = idx;
    const CycleInfo& cyc = rep.cycles[idx];
    if (t.kind == OrbitTail::Kind::Finite) {
      for (int k = 1; k <= t.preperiod + t.period; ++k) {
        const SpherePoint& p = (k >= t.preperiod) ? t.cycle[(k - t.preperiod) % t.period]
                                                  : t.orbit[k];
        if (!contains_point(rep.post, p, same)) rep.post.push_back(p);
      }
      if (t.preperiod == 0)
        for (const auto& p : t.cycle)
          if (!contains_point(rep.post_c, p, same)) rep.post_c.push_back(p);
      co.in_julia = cyc.cls == CycleClass::Repelling;
      co.boundary_ambiguous = cyc.cls == CycleClass::Indifferent;
    } else {
      rep.post_finite = false;
      for (size_t k = 1; k < t.orbit.size(); ++k)
        if (!contains_point(rep.post, t.orbit[k], same)) rep.post.push_back(t.orbit[k]);
      co.boundary_ambiguous = !cyc.attracting();
    }
    rep.orbits.push_back(co);
  }

  rep.is_pcf = std::all_of(rep.orbits.begin(), rep.orbits.end(), [](const CriticalOrbit& o) {
    return o.tail.kind == OrbitTail::Kind::Finite;
  });
  rep.is_subhyperbolic =
      std::all_of(rep.orbits.begin(), rep.orbits.end(), [&](const CriticalOrbit& o) {
        if (o.tail.kind == OrbitTail::Kind::Unresolved || o.boundary_ambiguous) return false;
        if (o.tail.kind == OrbitTail::Kind::Finite) return true;
        return rep.cycles[*o.cycle_index].attracting();
      });
  rep.is_hyperbolic =
      rep.is_subhyperbolic && std::none_of(rep.orbits.begin(), rep.orbits.end(),
                                           [](const CriticalOrbit& o) { return o.in_julia; });
  return rep;
}

}  // namespace carpet
