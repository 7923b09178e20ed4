#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carpet/boettcher.hpp"
#include "carpet/spatial.hpp"

namespace carpet {

/// Centroid of the region a curve bounds, taken in the chart where that
/// region is bounded (infinity for a curve around the unbounded component).
SpherePoint curve_centroid(const PeripheralCurve& curve);

/// Centroids of the `count` curves of largest diameter, largest first.
std::vector<SpherePoint> landmarks(std::span<const PeripheralCurve> curves, int count);

/// Maps of both orientations sending the first landmark triple (in each
/// 3-subset, in index order) to every ordered landmark triple; triples with a
/// repeated point are skipped, duplicates (moebius_distance <= dedup) dropped.
/// Throws PreconditionError for fewer than 3 curves.
std::vector<MoebiusMap> candidate_symmetries(std::span<const PeripheralCurve> curves,
                                             int landmark_count, double dedup = 1e-6);
/// The same enumeration over given landmark points.
std::vector<MoebiusMap> candidate_symmetries(std::span<const SpherePoint> landmarks,
                                             double dedup = 1e-6);

/// Nearest-neighbor cloud and the probe points mapped into it.
struct JuliaSamples {
  PointIndex cloud;
  std::vector<cplx> probes;
  double pixel = 0.0;
};

/// From a raster and its map: probes are backward-orbit points of f, and the
/// cloud holds the julia pixel centers together with the probes.
JuliaSamples julia_samples(const RasterGrid& grid, const RationalMap& f, int probes = 4000,
                           std::uint64_t seed = 1);
/// Cloud from given points; probes are a deterministic subset of them.
JuliaSamples julia_samples(std::vector<cplx> points, double pixel, int probes = 4000,
                           std::uint64_t seed = 1);

struct InvarianceScore {
  /// Largest distance, in pixels, from xi(probes of from) to the cloud of to
  /// and from xi^-1(probes of to) to the cloud of from.
  double score = 0.0;
  bool accepted = false;
};

/// Symmetric in the sense that xi^-1 gets the same score.
InvarianceScore verify_invariance(const MoebiusMap& xi, const JuliaSamples& from,
                                  const JuliaSamples& to, double tol_pixels = 2.0);
inline InvarianceScore verify_invariance(const MoebiusMap& xi, const JuliaSamples& samples,
                                         double tol_pixels = 2.0) {
  return verify_invariance(xi, samples, samples, tol_pixels);
}

/// |xi'(z)| in the plane; infinite at the pole.
double moebius_stretch(const MoebiusMap& xi, cplx z);

struct RefinedMap {
  MoebiusMap map;
  int pairs = 0;
  /// Max chordal distance between fitted images and their paired anchors.
  double residual = 0.0;
  bool exact = false;
};

/// Pairs each anchor with the anchor nearest its image (when the runner-up is
/// at least twice as far and the target is still free) and refits xi to those
/// pairs, quartering the pairing tolerance each round, up to six rounds.
/// exact when the residual over at least 4 pairs is below 1e-9.
RefinedMap refine_symmetry(const MoebiusMap& xi, std::span<const SpherePoint> anchors,
                           double pair_tol = 0.1);

struct SymmetryGroup {
  std::vector<MoebiusMap> elements;
  std::vector<double> scores;
  /// table[i][j] = index of elements[i] o elements[j]; -1 if not closed.
  std::vector<std::vector<int>> table;
  int order = 0;
  bool closed = false;
  /// "closed", "closure not reached" or "product rejected".
  std::string verdict;
  /// min over non-identity elements of max chordal displacement of the probes.
  double delta0 = 0.0;
};

constexpr double kGroupMatchTol = 1e-8;

/// Closes the accepted maps under composition and inverse, verifying every
/// new element against the samples.
SymmetryGroup group_closure(std::span<const MoebiusMap> accepted, const JuliaSamples& samples,
                            int budget = 256, double tol_pixels = 2.0);

struct FunctionalRelation {
  int m_prime = 0, m = 0, n = 0;
  /// Max chordal deviation of g^m'(xi z) from g^m(xi f^n z).
  double residual = 0.0;
  bool degree_identity = false;
};

struct FunctionalSearch {
  bool precheck = false;
  double precheck_score = 0.0;
  std::vector<FunctionalRelation> relations;
  /// Least l with (l + 1, l, 1) accepted.
  std::optional<int> reduced_l;
  double tolerance = 0.0;
};

/// Enumerates 1 <= m, n <= max_exp, m < m' <= max_exp with
/// deg(g)^(m' - m) = deg(f)^n. Requires max_exp <= 6.
FunctionalSearch functional_equation_search(const RationalMap& f, const RationalMap& g,
                                            const MoebiusMap& xi, const JuliaSamples& f_samples,
                                            const JuliaSamples& g_samples, int max_exp,
                                            double tol_pixels = 2.0, int probes = 1000);

struct SymmetryOptions {
  int landmark_count = 6;
  double tol_pixels = 2.0;
  int budget = 256;
};

struct SymmetryReport {
  std::vector<SpherePoint> landmarks;
  int candidates = 0;
  std::vector<MoebiusMap> accepted;
  std::vector<InvarianceScore> accepted_scores;
  std::vector<RefinedMap> refined;
  SymmetryGroup group;
  std::string caveat;
};

/// Full pipeline on a scene of f. Landmarks are the basepoints of the largest
/// valid Fatou components (curve centroids when fewer than 3 exist); candidates
/// are refined on all basepoints of components with at least 64 pixels, checked
/// for invariance and closed into a group.
SymmetryReport detect_symmetries(const RationalMap& f, const Scene& scene,
                                 const OrbitReport& report, const SymmetryOptions& options = {});

}  // namespace carpet
