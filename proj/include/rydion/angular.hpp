#pragma once

// Angular-momentum algebra: Clebsch-Gordan coefficients in the
// Condon-Shortley convention and the <l m|cos(theta)|l' m> factor of the
// dipole operator.

namespace rydion {

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M> with all arguments given
/// as twice their value, so half-integer spins stay exact integers.
/// Returns 0 for arguments outside the coupling triangle or M != m1 + m2.
double clebsch_gordan_2(int two_j1, int two_m1, int two_j2, int two_m2,
                        int two_J, int two_M);

/// Convenience overload for integer angular momenta.
double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M);

/// <l_to m|cos(theta)|l_from m>. Zero unless l_to = l_from +- 1
/// (the tridiagonal selection rule of the z coupling matrix).
double z_angular_factor(int l_from, int l_to, int m);

} // namespace rydion
