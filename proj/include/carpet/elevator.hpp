#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "carpet/orbits.hpp"
#include "carpet/spatial.hpp"

namespace carpet {

/// Normalized dynamics: J inside the disk of radius 1/2, infinity an
/// attracting fixed point, all in Euclidean coordinates.
struct ElevatorContext {
  ElevatorContext(RationalMap f, MoebiusMap m) : map(std::move(f)), normalizer(m) {}

  /// m o f^period o m^{-1}
  RationalMap map;
  MoebiusMap normalizer;
  int period = 1;
  /// The final step of the normalizer is z -> z / scale.
  double scale = 1.0;

  double eps0 = 0.0;
  /// Lower bound for diam f^n(B) at a maximal n: eps0 / (1.5 lipschitz).
  double delta0 = 0.0;
  /// max |f'| over the eps0-neighborhood of the julia pixels, with margin.
  double lipschitz = 0.0;
  double pixel = 0.0;

  std::vector<CriticalPoint> critical;
  std::vector<SpherePoint> post;
  std::vector<SpherePoint> post_c;
  long long N = 1;

  /// Julia pixel centers of the normalized raster.
  PointIndex julia;
  /// Points of J from backward orbits of a repelling fixed point.
  std::vector<cplx> seeds;

  double julia_radius = 0.0;
  double julia_diameter = 0.0;
  /// min |f(z)| over the sampled unit circle.
  double outer_modulus = 0.0;
};

struct NormalizeOptions {
  int resolution = 1024;
  int max_iter = 500;
  int seeds = 4096;
  std::uint64_t seed = 1;
};

/// Throws PreconditionError for degree < 2, Error when there is no attracting
/// cycle or the normalization checks fail after three rescalings.
ElevatorContext normalize(const RationalMap& f, const NormalizeOptions& options = {});

/// Context around given julia points, for synthetic maps (degree 1 allowed).
/// post is left empty; delta0 follows the same Lipschitz rule.
ElevatorContext synthetic_context(const RationalMap& map, std::vector<cplx> julia,
                                  std::vector<cplx> seeds, double eps0, double pixel);

/// Largest eps passing the context invariants, by bisection on [0, diam J / 4].
double select_eps0(const ElevatorContext& ctx);

/// Finite repelling fixed points.
std::vector<cplx> repelling_fixed_points(const RationalMap& f);

/// Points of J: a random backward orbit of the first repelling fixed point,
/// after 20 burn-in steps. Throws Error when there is no finite one.
std::vector<cplx> backward_orbit_points(const RationalMap& f, int count, std::uint64_t seed);

struct ElevatorResult {
  cplx p{};
  double r = 0.0;
  int n = 0;
  cplx q_tilde{};
  /// Target disk B'.
  cplx center{};
  double radius = 0.0;
  /// B' was moved to the postcritical point near q_tilde (radius 8 eps0).
  bool adjusted = false;
  long long k = 1;
  /// Preimage of the center under the branch of f^-n through p (adjusted only).
  std::optional<cplx> branch_point;
  /// f^n of 256 boundary samples, the center, then 32 interior samples.
  std::vector<cplx> images;
  double image_diameter = 0.0;

  bool inside_half = false;
  bool degree_ok = false;
  bool diameter_ok = false;
  bool valid() const { return inside_half && degree_ok && diameter_ok; }
};

constexpr int kElevatorBoundary = 256;
constexpr int kElevatorInterior = 32;
constexpr int kElevatorCap = 100000;

/// Throws PreconditionError unless 0 < r < eps0 and p lies within 1.5 pixels
/// of a julia pixel center; Error when n would exceed kElevatorCap.
ElevatorResult elevate(const ElevatorContext& ctx, cplx p, double r);

/// z -> f^n(z)
cplx iterate_point(const RationalMap& f, cplx z, int n);

struct NestedCheck {
  int n[3] = {0, 0, 0};
  bool monotone = false;
  /// Boundary samples of each deeper disk, mapped by the shallower n, stay
  /// within the shallower half target disk plus the tolerance.
  bool lands = false;
  double worst_excess = 0.0;
};

/// Elevations at radii r, r/2, r/4; tolerance defaults to two pixels.
NestedCheck nested_consistency(const ElevatorContext& ctx, cplx p, double r,
                               double tolerance = -1.0);

struct DistortionOptions {
  /// Disk radii are log-uniform in [lo, hi] * eps0.
  double r_lo = 1e-3;
  double r_hi = 0.9;
  int subdisks = 16;
  int arcs = 8;
  int pairs = 64;
  int fold_points = 16;
};

struct DistortionStats {
  int samples = 0;
  /// (a) diam A / diam B <= C1 diam(f^n A)^gamma; gamma is the smallest
  /// per-disk log-log slope.
  double gamma = 0.0;
  double C1 = 0.0;
  /// RMS log residual of the per-disk fits.
  double fit_residual = 0.0;
  bool degenerate = false;
  double r1 = 0.0;
  double C2 = 0.0;
  std::optional<double> C3;
  int fold_pairs = 0;
  bool q_in_post = true;

  double min_image_diameter = 0.0;
  double max_image_diameter = 0.0;
  int max_n = 0;
  long long max_k = 0;
  int invalid = 0;
  std::vector<double> disk_gamma;
};

DistortionStats distortion_stats(const ElevatorContext& ctx, int n_samples, std::uint64_t seed,
                                 const DistortionOptions& options = {});

/// Disk centers (seed points) and radii drawn as distortion_stats does.
std::vector<std::pair<cplx, double>> sample_disks(const ElevatorContext& ctx, int n,
                                                  std::uint64_t seed, double r_lo = 1e-3,
                                                  double r_hi = 0.9);

}  // namespace carpet
