#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carpet/sphere.hpp"

namespace carpet {

enum class CycleClass { Superattracting, Attracting, Repelling, Indifferent };

std::string to_string(CycleClass c);

struct CycleInfo {
  std::vector<SpherePoint> points;
  int period = 1;
  /// |(f^period)'| at a cycle point, chart independent.
  double multiplier = 0.0;
  CycleClass cls = CycleClass::Repelling;

  bool attracting() const {
    return cls == CycleClass::Superattracting || cls == CycleClass::Attracting;
  }
};

/// Multiplier thresholds: < 1e-9 superattracting, < 1 - 1e-9 attracting,
/// > 1 + 1e-9 repelling, otherwise indifferent. Throws if the points are not
/// an approximate cycle (chordal closure error >= 1e-6).
CycleInfo classify_cycle(const RationalMap& f, std::span<const SpherePoint> cycle);

struct OrbitTail {
  enum class Kind {
    Finite,      // the orbit lands exactly (1e-12) on a cycle
    Attracted,   // converges to a cycle without landing on it
    Unresolved,  // no revisit inside the budget
  };
  Kind kind = Kind::Unresolved;
  int preperiod = 0;
  int period = 0;
  /// Newton-refined cycle, starting at the first cycle point the orbit meets.
  std::vector<SpherePoint> cycle;
  /// z_0 .. z_{preperiod + period} for resolved tails.
  std::vector<SpherePoint> orbit;
};

std::string to_string(OrbitTail::Kind k);

struct OrbitTolerances {
  double revisit = 1e-9;  // chordal revisit that triggers cycle detection
  double exact = 1e-12;   // refined cycle must be hit this closely to count as finite
  double root = 1e-12;    // relative residual for the critical-point roots
};

OrbitTail orbit_tail(const RationalMap& f, const SpherePoint& z, int max_iter, double tol,
                     double exact_tol = OrbitTolerances{}.exact);

/// prod_{i<n} deg_f(f^i(q)).
long long orbit_local_degree(const RationalMap& f, std::span<const CriticalPoint> critical,
                             const SpherePoint& q, int n);
long long orbit_local_degree(const RationalMap& f, const SpherePoint& q, int n);

/// N(f) = prod over crit(f) of the local degree.
long long degree_bound_N(std::span<const CriticalPoint> critical);
long long degree_bound_N(const RationalMap& f);

struct CriticalOrbit {
  CriticalPoint critical;
  OrbitTail tail;
  /// Index into OrbitReport::cycles of the cycle the orbit ends on.
  std::optional<int> cycle_index;
  /// Lies in J(f): finite orbit ending on a repelling cycle.
  bool in_julia = false;
  /// Ends on an indifferent cycle, so Fatou/Julia membership is undecided.
  bool boundary_ambiguous = false;
};

struct OrbitReport {
  int degree = 0;
  std::vector<CriticalPoint> critical;
  std::vector<CriticalOrbit> orbits;
  std::vector<CycleInfo> cycles;
  bool post_finite = false;
  /// post(f) when finite; otherwise the resolved part only.
  std::vector<SpherePoint> post;
  std::vector<SpherePoint> post_c;
  bool is_pcf = false;
  bool is_subhyperbolic = false;
  bool is_hyperbolic = false;
  /// First critical point whose orbit exhausted the budget.
  std::optional<int> offending_critical;
  long long degree_bound = 0;
  int budget = 0;
  OrbitTolerances tolerances;

  std::vector<CycleInfo> attracting_cycles() const;
};

/// Throws PreconditionError for degree < 2 or a non-positive tolerance.
OrbitReport postcritical_report(const RationalMap& f, int budget = 10000,
                                const OrbitTolerances& tolerances = {});

/// Chordal set membership helper shared by the report builders.
bool contains_point(std::span<const SpherePoint> set, const SpherePoint& p, double tol);

}  // namespace carpet
