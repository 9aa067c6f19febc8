#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

// Extremal Stark states, one per n manifold at fixed magnetic quantum
// number m, and the dipole (z) matrix coupling them. States are expanded
// in the spherical |n l m> basis through angular-momentum recoupling with
// j1 = j2 = (n-1)/2; radial integrals come from quadrature (radial.hpp).

namespace rydion {

struct ParabolicState {
    int n;
    int n1;
    int n2;
    int m;
};

/// The extremal (uphill, n2 = 0) Stark state of the n manifold.
/// Throws ConfigError if |m| > n - 1.
ParabolicState extremal_state(int n, int m);

/// Expansion of a parabolic state over spherical |n l m>, l = |m| .. n-1.
struct SphericalExpansion {
    int n = 0;
    int m = 0;
    int l_min = 0;
    std::vector<double> c; // c[l - l_min]

    double coeff(int l) const {
        int i = l - l_min;
        return (i >= 0 && i < static_cast<int>(c.size())) ? c[static_cast<size_t>(i)] : 0.0;
    }
};

SphericalExpansion parabolic_to_spherical(const ParabolicState& s);

/// Version tag of the state/phase conventions baked into the dipole
/// matrix; part of the cache key.
inline constexpr const char* basis_convention_tag = "extremal-n2=0.cs-phase.v1";

struct StarkBasis {
    int m = 0;
    int n_min = 0;
    int n_max = 0;
    std::vector<ParabolicState> states; // ordered by n, no gaps
    Eigen::VectorXd energies;           // E_n = -1/(2 n^2)
    Eigen::MatrixXd dipole;             // z_{nn'}, symmetric

    // eigendecomposition of the dipole matrix, precomputed for the
    // split-operator propagator
    Eigen::MatrixXd dipole_eigvecs;
    Eigen::VectorXd dipole_eigvals;

    int size() const { return static_cast<int>(states.size()); }
    int n_of(int idx) const { return states[static_cast<size_t>(idx)].n; }
    /// Index of manifold n, or -1 if outside the basis.
    int index_of(int n) const {
        return (n >= n_min && n <= n_max) ? n - n_min : -1;
    }
};

struct BasisOptions {
    /// Directory for the on-disk dipole-matrix cache; empty disables caching.
    std::optional<std::filesystem::path> cache_dir;
};

/// Build the basis and its dipole matrix for fixed m over manifolds
/// n = n_min .. n_max. n_min is raised to |m| + 1 when necessary.
/// The result is immutable and safe to share across threads.
StarkBasis build_dipole_matrix(int m, int n_min, int n_max,
                               const BasisOptions& opts = {});

} // namespace rydion
