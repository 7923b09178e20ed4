#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "carpet/raster.hpp"

namespace carpet {

enum class Metric { Chordal, Euclidean };

/// max over vertex pairs (u, v) of min(diam alpha, diam beta) / d(u, v), with
/// alpha, beta the two vertex subarcs. Exact over the vertex set in O(V^2);
/// curves above 4096 vertices are resampled uniformly by index first.
/// Throws below 8 vertices (after dropping repeated adjacent vertices).
double quasicircle_constant(std::span<const cplx> vertices, Metric metric = Metric::Chordal);
double quasicircle_constant(const PeripheralCurve& curve);

constexpr int kQuasicircleVertexCap = 4096;

struct Separation {
  /// min over pairs of dist(J_k, J_l) / min(diam J_k, diam J_l); 0 if two
  /// curves intersect.
  double c = 0.0;
  int first = -1;
  int second = -1;
  bool intersecting = false;
};

Separation relative_separation(std::span<const PeripheralCurve> curves,
                               Metric metric = Metric::Chordal);
/// Same on raw polylines (each closed).
Separation relative_separation(std::span<const std::vector<cplx>> curves,
                               Metric metric = Metric::Chordal);

struct ScaleStats {
  /// Smallest C making at least 99% of samples satisfiable.
  double C = 0.0;
  /// Fraction of samples satisfiable with C <= c_limit.
  double pass_rate = 0.0;
  double c_limit = 64.0;
  long samples = 0;
  /// Per-sample smallest admissible constant (infinite when no curve meets
  /// the ball).
  std::vector<double> per_sample;
};

/// Samples p among julia pixel centers and r log-uniform in
/// [8 chordal pixels, 2]; a sample is satisfied by a curve meeting B(p, r)
/// with r / C <= diam <= C r. Deterministic for a fixed seed.
ScaleStats locations_and_scales(std::span<const PeripheralCurve> curves, const RasterGrid& grid,
                                long n_samples, std::uint64_t seed, double c_limit = 64.0);

struct PorosityStats {
  /// 1st percentile of (largest empty disk radius inside B(p, r)) / r.
  double c_por = 0.0;
  /// Fraction of samples whose empty disk exceeds one pixel.
  double pass_rate = 0.0;
  long samples = 0;
};

/// Exact Euclidean distance transform of the julia mask, in pixels, to the
/// nearest julia pixel center (infinite when there is none).
std::vector<double> distance_to_julia(const RasterGrid& grid);

/// Samples p among julia pixels (all pixels if none) and r log-uniform in
/// [8, min(128, n/4)] pixels; radii are measured in pixels of the raster.
PorosityStats porosity_constant(const RasterGrid& grid, long n_samples, std::uint64_t seed);

struct DistortionBin {
  double lo = 0.0, hi = 0.0;
  long count = 0;
  /// 99th percentile of the output ratio.
  double q99 = 0.0;
};

/// Random triples (u, v, w) of the sampled graph x -> y; bins the input ratio
/// d(u,v)/d(u,w) logarithmically over [1e-3, 1e3] and records the 99th
/// percentile output ratio per bin. Degenerate triples are skipped.
std::vector<DistortionBin> qs_distortion(std::span<const cplx> x, std::span<const cplx> y,
                                         long n_triples, std::uint64_t seed, int bins = 12,
                                         Metric metric = Metric::Euclidean);

struct GeometryReport {
  std::vector<double> quasicircle;  // per traced curve with >= 8 vertices
  double L = 0.0;
  Separation separation;
  ScaleStats scales;
  PorosityStats porosity;
  int curves = 0;
};

GeometryReport geometry_report(const Scene& scene, std::span<const PeripheralCurve> curves,
                               long n_samples, std::uint64_t seed);

}  // namespace carpet
