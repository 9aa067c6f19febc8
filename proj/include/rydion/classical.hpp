#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "rydion/drive.hpp"

// Classical counterpart of the quantum propagation: microcanonical
// sampling of the n0 shell and integration of driven-Kepler trajectories
// through the same drive protocol. An atom counts as ionized when its
// final energy is positive or its classical action exceeds the n_cut
// detection boundary.

namespace rydion {

struct TrajectoryState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
    double time_au = 0.0;

    double energy() const {
        return 0.5 * momentum.squaredNorm() - 1.0 / position.norm();
    }
    /// n_cl = 1/sqrt(-2E) for bound states, +inf otherwise.
    double classical_action() const {
        const double e = energy();
        return e < 0.0 ? 1.0 / std::sqrt(-2.0 * e)
                       : std::numeric_limits<double>::infinity();
    }
    Eigen::Vector3d angular_momentum() const { return position.cross(momentum); }
};

/// Draws orbits from the energy shell E = -1/(2 n0^2) with the flat
/// Liouville measure: (L, Lz) uniform over the triangle |Lz| <= L <= n0
/// and all angle variables uniform. An optional Lz window restricts the
/// draw (used for per-m0 classical curves) by rejection.
class MicrocanonicalSampler {
public:
    MicrocanonicalSampler(int n0, std::uint64_t seed,
                          std::optional<std::pair<double, double>> lz_window = {});

    TrajectoryState sample();

    int n0() const { return n0_; }

private:
    int n0_;
    std::optional<std::pair<double, double>> lz_window_;
    std::mt19937_64 rng_;
};

enum class ClassicalBackend {
    KeplerSplit, // fixed-step kick/exact-Kepler-drift splitting (production)
    SundmanRkdp  // adaptive RK5(4) in regularized time ds = dt/r (validation)
};

struct ClassicalOptions {
    ClassicalBackend backend = ClassicalBackend::KeplerSplit;
    int steps_per_cycle = 2048; // KeplerSplit
    double rtol = 1e-12;        // SundmanRkdp per-step relative tolerance
    int trajectory_id = -1;     // reported in diagnostics
};

/// Integrate one trajectory through the full protocol (t = 0 to
/// total_cycles). Throws NumericalError (naming the trajectory id) on
/// step-size underflow near the nucleus.
TrajectoryState integrate_trajectory(const TrajectoryState& start,
                                     const DriveProtocol& drive,
                                     const ClassicalOptions& opts = {});

struct ClassicalRunOptions {
    int n_trajectories = 25;
    int n_cut = 91;
    std::uint64_t seed = 20010329;
    std::optional<std::pair<double, double>> lz_window;
    ClassicalOptions integrator;
    /// optional per-trajectory sink: (id, final state, ionized)
    std::function<void(int, const TrajectoryState&, bool)> per_trajectory;
};

/// Fraction of sampled trajectories ionized by the protocol. Trajectory i
/// uses the deterministic sub-seed mix(seed, i), so results do not depend
/// on evaluation order.
double classical_ionization_probability(int n0, const DriveProtocol& drive,
                                        const ClassicalRunOptions& opts = {});

} // namespace rydion
