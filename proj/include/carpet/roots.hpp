#pragma once

#include <vector>

#include "carpet/sphere.hpp"

namespace carpet {

struct Root {
  cplx z;
  int multiplicity = 1;
};

struct RootOptions {
  /// Relative residual |p(z)| / sum|c_i||z|^i accepted for a root.
  double residual_tol = 1e-12;
  /// Roots closer than this are merged and their multiplicities summed.
  double merge_distance = 1e-6;
  int max_iterations = 800;
};

class RootFindingError : public Error {
 public:
  RootFindingError(const std::string& what, double worst_residual)
      : Error(what), worst_residual_(worst_residual) {}
  double worst_residual() const { return worst_residual_; }

 private:
  double worst_residual_;
};

/// All roots of p via Aberth-Ehrlich simultaneous iteration, clustered by
/// multiplicity. Exact roots at zero are split off before iterating.
/// Throws RootFindingError if a root misses the residual tolerance.
std::vector<Root> polynomial_roots(const Polynomial& p, const RootOptions& options = {});

double relative_residual(const Polynomial& p, cplx z);

}  // namespace carpet
