#pragma once

#include <Eigen/Dense>

// Exact propagation of the attractive Kepler problem (mu = 1) through the
// universal-variable formulation with Stumpff functions; valid for
// elliptic, parabolic and hyperbolic motion, including near-collision
// passes of strongly eccentric orbits.

namespace rydion {

/// Advance (r, v) by dt along the exact Kepler orbit. Throws
/// NumericalError if the universal Kepler equation fails to converge.
void kepler_drift(Eigen::Vector3d& r, Eigen::Vector3d& v, double dt);

} // namespace rydion
