#pragma once

#include "magtunnel/potential.hpp"

namespace magtunnel::testing {

/// Bump wells of depth 1 and radius 1 at (+-2, 0) in a unit field.
inline PotentialSpec canonical_spec() { return PotentialSpec::make(1.0, 2.0, 1.0, -1.0); }

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

} // namespace magtunnel::testing
