#pragma once

#include "vstab/profile.hpp"

namespace vstab::test {

inline Profile baseline(double alpha = 1.0) {
  ProfileParams p;
  p.alpha = alpha;
  return build_deep_well(p);
}

inline Profile deep_well(double B, double alpha = 1.0) {
  ProfileParams p;
  p.alpha = alpha;
  p.B = B;
  return build_deep_well(p);
}

/// The blend the alpha = 1 homotopy settles on: theta0 + delta between B = 0 and B = 100,
/// with m_b < 2 < m_a < 3.
inline Profile reference_blend() { return blend(baseline(), deep_well(100.0), 0.2984); }

}  // namespace vstab::test
