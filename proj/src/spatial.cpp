#include "carpet/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace carpet {

namespace {

constexpr long kLeaf = 8;

double coord(cplx z, int axis) { return axis == 0 ? z.real() : z.imag(); }

}  // namespace

PointIndex::PointIndex(std::vector<cplx> points) : pts_(std::move(points)) {
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0L);
  axis_.assign(pts_.size(), 0);
  box_.assign(pts_.size(), {0.0, 0.0, 0.0, 0.0});
  build(0, static_cast<long>(pts_.size()));
}

void PointIndex::build(long lo, long hi) {
  if (hi - lo <= kLeaf) return;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (long t = lo; t < hi; ++t) {
    const cplx z = pts_[order_[t]];
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  const int axis = (x1 - x0 >= y1 - y0) ? 0 : 1;
  const long mid = lo + (hi - lo) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](long a, long b) {
                     const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  axis_[mid] = static_cast<unsigned char>(axis);
  box_[mid] = {x0, x1, y0, y1};
  build(lo, mid);
  build(mid + 1, hi);
}

void PointIndex::search(long lo, long hi, cplx z, long& best, double& bd) const {
  auto consider = [&](long k) {
    const double d = std::abs(pts_[k] - z);
    if (d < bd || (d == bd && k < best)) {
      bd = d;
      best = k;
    }
  };
  if (hi - lo <= kLeaf) {
    for (long t = lo; t < hi; ++t) consider(order_[t]);
    return;
  }
  const long mid = lo + (hi - lo) / 2;
  const auto& b = box_[mid];
  const double ox = std::max({b[0] - z.real(), 0.0, z.real() - b[1]});
  const double oy = std::max({b[2] - z.imag(), 0.0, z.imag() - b[3]});
  if (std::hypot(ox, oy) > bd) return;
  const int axis = axis_[mid];
  const double gap = coord(z, axis) - coord(pts_[order_[mid]], axis);
  consider(order_[mid]);
  if (gap < 0.0) {
    search(lo, mid, z, best, bd);
    if (-gap <= bd) search(mid + 1, hi, z, best, bd);
  } else {
    search(mid + 1, hi, z, best, bd);
    if (gap <= bd) search(lo, mid, z, best, bd);
  }
}

std::pair<long, double> PointIndex::nearest(cplx z) const {
  long best = -1;
  double bd = std::numeric_limits<double>::infinity();
  if (!pts_.empty()) search(0, static_cast<long>(pts_.size()), z, best, bd);
  return {best, bd};
}

double hausdorff_distance(const PointIndex& a, const PointIndex& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (cplx z : a.points()) worst = std::max(worst, b.distance(z));
  for (cplx z : b.points()) worst = std::max(worst, a.distance(z));
  return worst;
}

}  // namespace carpet
