#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carpet/raster.hpp"

namespace carpet {

struct BoettcherRow {
  SpherePoint z;
  /// Boettcher coordinate; valid only when ok.
  cplx psi{};
  /// |psi(f(z)) - psi(z)^k|, with psi(f(z)) evaluated from its own orbit.
  double residual = 0.0;
  /// 1 - |psi|: near 0 close to the component boundary, where the iterated
  /// roots converge slowly.
  double confidence = 0.0;
  int iterations = 0;
  bool ok = false;
  /// Some root step turned by more than 0.4 / k radians.
  bool flagged = false;
  std::string error;
};

/// Local coordinate zeta (z - p, or 1/z at infinity) in which the map reads
/// g(zeta) = a zeta^k (1 + O(zeta)). The chart psi = lim (c g^n)^(1/k^n) with
/// c^(k-1) = a; among the k - 1 admissible c the one with argument closest
/// to 0 is used, so psi'(p) is positive real whenever a is.
class Boettcher {
 public:
  Boettcher(const RationalMap& f, const SpherePoint& p);

  const SpherePoint& point() const { return p_; }
  int k() const { return k_; }
  cplx leading() const { return a_; }
  cplx scale() const { return c_; }
  const RationalMap& local_map() const { return g_; }

  cplx coordinate(const SpherePoint& z) const;
  BoettcherRow evaluate(const SpherePoint& z) const;

  int max_iter = 200;

 private:
  bool psi(cplx zeta, cplx& out, int& iterations, bool& flagged, std::string& error) const;

  RationalMap f_;
  SpherePoint p_;
  int k_ = 0;
  RationalMap g_;
  cplx a_{}, c_{};
};

struct BoettcherChart {
  SpherePoint point;
  int k = 0;
  /// The normalization constant c (derivative of psi at p in the chart).
  cplx scale{};
  std::vector<BoettcherRow> rows;

  double max_residual() const;
  int failed() const;
};

/// Throws PreconditionError unless p is a fixed critical point.
BoettcherChart boettcher_chart(const RationalMap& f, const SpherePoint& p,
                               std::span<const SpherePoint> samples);

/// max |psi_U(f(z)) - psi_V(z)^k| over matched rows: row i of `image` must be
/// f of row i of `source`. Throws on unmatched rows.
double conjugacy_residual(const RationalMap& f, std::span<const BoettcherRow> image,
                          std::span<const BoettcherRow> source, int k);

struct FatouComponentRecord {
  int component = -1;
  /// 0 for periodic components, else the least m with f^m(U) periodic.
  int level = -1;
  SpherePoint basepoint;
  int image = -1;
  /// Local degree of f at the basepoint: psi_{f(U)} o f = P_k o psi_U.
  int exponent = 0;
  bool valid = false;
  std::string error;
};

/// Component of scene.grid holding p, consulting the inverted raster for
/// points outside the window; -1 on julia pixels or when unknown.
int component_of(const Scene& scene, const SpherePoint& p);

/// Basepoints of every component with at least min_pixels pixels, computed
/// level by level: level-0 components get the attracting-cycle point inside,
/// higher levels the unique preimage of the image basepoint inside the
/// component. Failures are recorded per component.
std::vector<FatouComponentRecord> fatou_records(const RationalMap& f, const Scene& scene,
                                                const OrbitReport& report, int min_pixels = 4);

/// Single-component form; throws when the component holds zero or several
/// candidate points.
SpherePoint basepoint(const RationalMap& f, const Scene& scene, int component,
                      std::span<const FatouComponentRecord> known, const OrbitReport& report);

struct RotationSample {
  cplx z;
  cplx phi;
};

struct RotationResult {
  bool compatible = false;
  /// "degree", "residual" or "root" when incompatible.
  std::string reason;
  cplx a{};
  double fit_residual = 0.0;
  double equation_residual = 0.0;
  double root_residual = 0.0;
};

/// Solves phi = a z on the unit circle subject to phi^l = phi(z^k)^n, given
/// samples of an orientation-preserving circle homeomorphism. phi(z^k) is
/// read from the samples by interpolation in the argument. Throws
/// PreconditionError for k < 2, fewer than 3 samples or non-monotone phi.
RotationResult rotation_solve(std::span<const RotationSample> samples, int k, int l, int n,
                              double tol = 1e-9);

}  // namespace carpet
