#pragma once

#include <array>
#include <utility>
#include <vector>

#include "carpet/sphere.hpp"

namespace carpet {

/// Static kd-tree over planar points for nearest-neighbor queries.
class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(std::vector<cplx> points);

  bool empty() const { return pts_.empty(); }
  size_t size() const { return pts_.size(); }
  const std::vector<cplx>& points() const { return pts_; }

  /// Index of the nearest point (smallest index on ties) and the distance to
  /// it; (-1, inf) when empty.
  std::pair<long, double> nearest(cplx z) const;
  double distance(cplx z) const { return nearest(z).second; }

 private:
  void build(long lo, long hi);
  void search(long lo, long hi, cplx z, long& best, double& bd) const;

  std::vector<cplx> pts_;
  /// Tree order of point indices; the node over [lo, hi) splits at its middle.
  std::vector<long> order_;
  /// Split axis and bounding box (x0, x1, y0, y1) of the node whose middle
  /// element is at that position.
  std::vector<unsigned char> axis_;
  std::vector<std::array<double, 4>> box_;
};

/// Symmetric Hausdorff distance between finite point sets.
double hausdorff_distance(const PointIndex& a, const PointIndex& b);

}  // namespace carpet
