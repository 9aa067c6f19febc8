#pragma once

#include <vector>

// Hydrogenic bound-state radial functions R_nl and their dipole integrals
// <n l| r |n' l'>, evaluated by composite Gauss-Legendre quadrature on an
// exponentially spaced panel grid. Normalization constants go through
// log-gamma so n up to a few hundred stays finite.
//
// Phase convention: the leading (highest-power) coefficient of the radial
// polynomial is positive, i.e. R_nl(r) > 0 as r -> infinity.

namespace rydion {

/// Quadrature grid: nodes r[i] with weights w[i] such that
/// integral f(r) dr ~ sum w[i] f(r[i]) over [0, r_max].
struct RadialGrid {
    std::vector<double> r;
    std::vector<double> w;
    double r_max = 0.0;
};

/// Grid sized for all bound states with principal quantum number <= n_max:
/// range ~3 n_max^2, exponentially spaced panels, 24-point Gauss-Legendre
/// per panel (several thousand nodes in total).
RadialGrid make_radial_grid(int n_max);

/// R_nl(r) at a single point.
double hydrogen_radial(int n, int l, double r);

/// R_nl at all grid nodes, appended into out (resized to grid size).
void hydrogen_radial_column(int n, int l, const RadialGrid& grid,
                            std::vector<double>& out);

/// Radial dipole integral, integral of R_{n,l} r^3 R_{n2,l2} dr, by
/// quadrature on a grid sized for max(n, n2). Throws ConfigError unless
/// |l - l2| = 1 and both states are valid bound states.
double radial_dipole(int n, int l, int n2, int l2);

/// Same integral on a caller-provided grid (used by the batched basis
/// builder so single integrals and full matrices share one code path).
double radial_dipole_on_grid(int n, int l, int n2, int l2, const RadialGrid& grid);

} // namespace rydion
