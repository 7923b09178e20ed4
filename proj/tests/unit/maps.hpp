#pragma once

#include "carpet/sphere.hpp"

namespace testmaps {

// z^2 - 1/(16 z^2) = (16 z^4 - 1) / (16 z^2)
inline carpet::RationalMap carpet_map() {
  using carpet::Polynomial;
  return carpet::RationalMap(Polynomial({-1, 0, 0, 0, 16}), Polynomial({0, 0, 16}));
}

inline carpet::RationalMap quadratic(carpet::cplx c) {
  using carpet::Polynomial;
  return carpet::RationalMap(Polynomial({c, 0, 1}), Polynomial({1}));
}

}  // namespace testmaps
