#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "carpet/orbits.hpp"
#include "carpet/sphere.hpp"

namespace carpet {

/// Square window [cx - hw, cx + hw] x [cy - hw, cy + hw] in a chart. With
/// `inverted` the chart coordinate is w = 1/z.
struct Window {
  cplx center{};
  double half_width = 2.0;
  bool inverted = false;
};

constexpr std::int32_t kUnresolved = -1;

class RasterGrid {
 public:
  RasterGrid() = default;
  RasterGrid(Window window, int resolution);

  const Window& window() const { return window_; }
  int resolution() const { return n_; }
  /// Side of a pixel in chart units.
  double pixel_size() const { return px_; }

  /// Chart coordinate of the center of pixel (i, j); row j = 0 is the top.
  cplx pixel_center(int i, int j) const;
  SpherePoint pixel_point(int i, int j) const;
  /// Chordal radius of half a pixel at (i, j).
  double chordal_half_pixel(int i, int j) const;
  /// Pixel containing p, if inside the window.
  bool locate(const SpherePoint& p, int& i, int& j) const;
  cplx chart_coordinate(const SpherePoint& p) const;
  SpherePoint from_chart(cplx u) const;

  size_t index(int i, int j) const { return static_cast<size_t>(j) * n_ + i; }

  std::vector<std::int32_t> label;  // cycle index or kUnresolved
  std::vector<std::int32_t> iterations;
  std::vector<std::uint8_t> julia;

  std::vector<CycleInfo> cycles;
  double capture_radius = 0.0;
  int max_iter = 0;

  long julia_count() const;
  long unresolved_count() const;

 private:
  Window window_;
  int n_ = 0;
  double px_ = 0.0;
};

/// min(half the minimal chordal distance between points of distinct cycles,
/// 0.1), floored at 1e-3.
double default_capture_radius(std::span<const CycleInfo> cycles);

struct RasterOptions {
  Window window;
  int resolution = 512;
  int max_iter = 500;
  /// <= 0 selects default_capture_radius.
  double capture_radius = 0.0;
};

/// Classifies every pixel by the attracting cycle its center is captured by.
/// A pixel is labeled only if, when the orbit first comes within half the
/// capture radius of a cycle point, the image of the whole pixel (bounded by
/// the accumulated spherical derivative) still lies inside the capture disk
/// and that linearized image never exceeded chordal size 1 along the orbit;
/// otherwise it stays unresolved. Julia pixels are those whose 8-neighborhood
/// holds two labels or an unresolved pixel.
RasterGrid rasterize(const RationalMap& f, std::span<const CycleInfo> attracting,
                     const RasterOptions& options);
RasterGrid rasterize(const RationalMap& f, const OrbitReport& report,
                     const RasterOptions& options);
/// Single-threaded reference; bitwise identical output.
RasterGrid rasterize_serial(const RationalMap& f, std::span<const CycleInfo> attracting,
                            const RasterOptions& options);

struct Component {
  int id = 0;
  std::int32_t label = kUnresolved;
  long pixels = 0;
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // inclusive bounding box
  bool touches_edge = false;
  /// Scanline index of the topmost-leftmost pixel.
  long first = 0;
};

struct Components {
  std::vector<Component> list;
  /// Per pixel component id, -1 on julia pixels.
  std::vector<std::int32_t> map;
};

/// 4-connected components of non-julia pixels sorted by descending size, ties
/// by scanline order of their first pixel.
Components label_components(const RasterGrid& grid);

struct PeripheralCurve {
  int component = -1;
  /// Closed polyline (last vertex joins the first) in the standard chart,
  /// component interior on the left.
  std::vector<cplx> vertices;
  double diameter = 0.0;
  bool traced_inverted = false;
  /// Pixel size of the raster the curve was traced in, in chart units and as
  /// a chordal length at the first vertex.
  double pixel_size = 0.0;
  double chordal_pixel = 0.0;
};

/// Max pairwise chordal distance over the vertices.
double polyline_diameter(std::span<const cplx> vertices);
double polyline_diameter_serial(std::span<const cplx> vertices);

/// Marching-squares contour of the outer boundary of a component traced
/// within one grid. Throws if the component touches the window edge or has
/// fewer than 4 pixels.
PeripheralCurve trace_in_grid(const RasterGrid& grid, const Components& comps, int id);

bool is_simple(std::span<const cplx> vertices);
/// Winding number of the closed polyline about p.
int winding_number(std::span<const cplx> vertices, cplx p);

/// The standard-chart raster together with a w = 1/z raster of the same
/// half-width, so components touching the window edge can be traced.
struct Scene {
  RasterGrid grid;
  RasterGrid inverted;
  Components comps;
  Components inv_comps;
};

Scene build_scene(const RationalMap& f, std::span<const CycleInfo> attracting,
                  const RasterOptions& options);

/// Traces component `id` of scene.grid, switching to the inverted raster when
/// it touches the window edge. Throws when both charts fail.
PeripheralCurve trace_peripheral_curve(const Scene& scene, int id);

/// All components with at least min_pixels pixels, in component order.
std::vector<PeripheralCurve> trace_all(const Scene& scene, int min_pixels = 4);

struct CarpetEvidence {
  int components = 0;
  int traced = 0;
  int sub_resolution = 0;
  int unbounded = 0;
  bool all_simple = false;
  bool pairwise_disjoint = false;
  double min_diameter_px = 0.0;
  /// At least 10 traced curves, all simple and pairwise disjoint, with the
  /// smallest no larger than 10 pixels.
  bool consistent = false;
};

CarpetEvidence carpet_evidence(const Scene& scene, std::span<const PeripheralCurve> curves);

/// Any two segments of distinct curves intersect.
bool curves_intersect(std::span<const PeripheralCurve> curves, int* first = nullptr,
                      int* second = nullptr);

}  // namespace carpet
