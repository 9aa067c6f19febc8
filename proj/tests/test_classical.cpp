#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rydion/classical.hpp"
#include "rydion/errors.hpp"
#include "rydion/kepler.hpp"
#include "test_fixtures.hpp"

using namespace rydion;

TEST_CASE("kepler drift: closed orbit returns after one period") {
    // n = 37-like ellipse with moderate eccentricity
    Eigen::Vector3d r(900.0, 0.0, 0.0);
    Eigen::Vector3d v(0.0, 0.045, 0.002);
    const double e0 = 0.5 * v.squaredNorm() - 1.0 / r.norm();
    REQUIRE(e0 < 0.0);
    const double a = -0.5 / e0;
    const double period = 2.0 * std::numbers::pi * std::pow(a, 1.5);

    Eigen::Vector3d r1 = r, v1 = v;
    kepler_drift(r1, v1, period);
    CHECK((r1 - r).norm() < 1e-6 * a);
    CHECK((v1 - v).norm() < 1e-9);

    // energy after an incommensurate long drift
    Eigen::Vector3d r2 = r, v2 = v;
    kepler_drift(r2, v2, 12345.678);
    const double e2 = 0.5 * v2.squaredNorm() - 1.0 / r2.norm();
    CHECK(e2 == doctest::Approx(e0).epsilon(1e-13));
}

TEST_CASE("kepler drift: hyperbolic branch and backward drift") {
    Eigen::Vector3d r(100.0, 50.0, 0.0);
    Eigen::Vector3d v(0.2, 0.0, 0.05); // E > 0
    const double e0 = 0.5 * v.squaredNorm() - 1.0 / r.norm();
    REQUIRE(e0 > 0.0);
    Eigen::Vector3d r1 = r, v1 = v;
    kepler_drift(r1, v1, 5000.0);
    CHECK(0.5 * v1.squaredNorm() - 1.0 / r1.norm() == doctest::Approx(e0).epsilon(1e-12));
    kepler_drift(r1, v1, -5000.0);
    CHECK((r1 - r).norm() < 1e-8 * r.norm());
}

TEST_CASE("microcanonical sampler: on-shell energy and angular momenta") {
    MicrocanonicalSampler sampler(37, 42);
    const double e_shell = -0.5 / (37.0 * 37.0);
    for (int i = 0; i < 500; ++i) {
        const TrajectoryState s = sampler.sample();
        CHECK(std::abs(s.energy() - e_shell) < 1e-12);
        const double L = s.angular_momentum().norm();
        CHECK(L <= 37.0 + 1e-9);
        CHECK(std::abs(s.angular_momentum().z()) <= L + 1e-12);
    }
}

TEST_CASE("microcanonical sampler: flat (L, Lz) measure") {
    // P(L) ~ L means u = (L/n0)^2 is uniform; Lz/L is uniform given L.
    // Chi-squared uniformity over 20 bins at 1e5 samples, fixed seed.
    MicrocanonicalSampler sampler(37, 1234);
    const int N = 100000, bins = 20;
    std::vector<int> hist_u(bins, 0), hist_z(bins, 0);
    for (int i = 0; i < N; ++i) {
        const TrajectoryState s = sampler.sample();
        const Eigen::Vector3d L = s.angular_momentum();
        const double u = (L.norm() / 37.0) * (L.norm() / 37.0);
        const double z = 0.5 * (L.z() / L.norm() + 1.0);
        ++hist_u[std::min(bins - 1, static_cast<int>(u * bins))];
        ++hist_z[std::min(bins - 1, static_cast<int>(z * bins))];
    }
    const double expected = static_cast<double>(N) / bins;
    double chi2_u = 0.0, chi2_z = 0.0;
    for (int b = 0; b < bins; ++b) {
        chi2_u += (hist_u[b] - expected) * (hist_u[b] - expected) / expected;
        chi2_z += (hist_z[b] - expected) * (hist_z[b] - expected) / expected;
    }
    CHECK(chi2_u < oracle::chi2_crit_dof19_p99);
    CHECK(chi2_z < oracle::chi2_crit_dof19_p99);
}

TEST_CASE("microcanonical sampler: Lz window is honored") {
    MicrocanonicalSampler sampler(37, 7, std::make_pair(7.5, 12.5));
    for (int i = 0; i < 200; ++i) {
        const TrajectoryState s = sampler.sample();
        const double lz = s.angular_momentum().z();
        CHECK(lz >= 7.5);
        CHECK(lz <= 12.5);
    }
    CHECK_THROWS_AS(MicrocanonicalSampler(37, 7, std::make_pair(50.0, 55.0)).sample(),
                    ConfigError);
}

TEST_CASE("zero-field integration conserves energy through the full protocol") {
    DriveProtocol drive = fixtures::toy_drive(0.0);
    drive.envelope_params = EnvelopeParams{}; // full 500-cycle protocol
    drive.total_cycles = 500.0;
    MicrocanonicalSampler sampler(37, 99);
    ClassicalOptions opts;
    opts.steps_per_cycle = 512;
    for (int i = 0; i < 5; ++i) {
        const TrajectoryState start = sampler.sample();
        const TrajectoryState end = integrate_trajectory(start, drive, opts);
        CHECK(std::abs(end.energy() / start.energy() - 1.0) < 1e-9);
        CHECK(end.time_au == doctest::Approx(drive.total_time()).epsilon(1e-9));
    }
}

TEST_CASE("regularized adaptive backend conserves energy at zero field") {
    // validation backend: adaptive error control drifts slowly, unlike the
    // exact-Kepler production splitting
    DriveProtocol drive = fixtures::toy_drive(0.0, 12.0);
    MicrocanonicalSampler sampler(37, 123);
    ClassicalOptions opts;
    opts.backend = ClassicalBackend::SundmanRkdp;
    for (int i = 0; i < 3; ++i) {
        const TrajectoryState start = sampler.sample();
        const TrajectoryState end = integrate_trajectory(start, drive, opts);
        CHECK(std::abs(end.energy() / start.energy() - 1.0) < 1e-7);
    }
}

TEST_CASE("backends agree on a short driven trajectory") {
    DriveProtocol drive = fixtures::toy_drive(200.0, 12.0);
    MicrocanonicalSampler sampler(37, 321);
    const TrajectoryState start = sampler.sample();
    ClassicalOptions split;
    split.steps_per_cycle = 8192;
    ClassicalOptions rkdp;
    rkdp.backend = ClassicalBackend::SundmanRkdp;
    const TrajectoryState a = integrate_trajectory(start, drive, split);
    const TrajectoryState b = integrate_trajectory(start, drive, rkdp);
    CHECK(std::abs(a.energy() - b.energy()) <
          1e-6 * std::max(std::abs(a.energy()), 1e-4));
}

TEST_CASE("time-reversal at zero field returns the initial condition") {
    DriveProtocol drive = fixtures::toy_drive(0.0, 12.0);
    MicrocanonicalSampler sampler(37, 55);
    const TrajectoryState start = sampler.sample();
    ClassicalOptions opts;
    opts.steps_per_cycle = 1024;
    TrajectoryState fwd = integrate_trajectory(start, drive, opts);
    fwd.momentum = -fwd.momentum;
    fwd.time_au = 0.0;
    TrajectoryState back = integrate_trajectory(fwd, drive, opts);
    back.momentum = -back.momentum;
    CHECK((back.position - start.position).norm() < 1e-6 * 37.0 * 37.0);
    CHECK((back.momentum - start.momentum).norm() < 1e-6 / 37.0);
}

TEST_CASE("overwhelming field ionizes nearly every trajectory") {
    // ~10x the threshold field of n0 = 37
    DriveProtocol drive = fixtures::toy_drive(3450.0, 12.0);
    ClassicalRunOptions opts;
    opts.n_trajectories = 25;
    opts.seed = 2024;
    opts.integrator.steps_per_cycle = 1024;
    const double p = classical_ionization_probability(37, drive, opts);
    CHECK(p >= 0.9);
}

TEST_CASE("ionization probability: zero field, grid values, determinism") {
    DriveProtocol drive = fixtures::toy_drive(0.0, 12.0);
    ClassicalRunOptions opts;
    opts.n_trajectories = 25;
    opts.integrator.steps_per_cycle = 256;
    CHECK(classical_ionization_probability(37, drive, opts) == 0.0);

    DriveProtocol strong = fixtures::toy_drive(800.0, 12.0);
    const double p1 = classical_ionization_probability(37, strong, opts);
    const double p2 = classical_ionization_probability(37, strong, opts);
    CHECK(p1 == p2); // bit-reproducible for a fixed seed
    CHECK(p1 == doctest::Approx(std::round(p1 * 25.0) / 25.0).epsilon(1e-15));

    ClassicalRunOptions other = opts;
    other.seed = 1;
    CHECK(std::isfinite(classical_ionization_probability(37, strong, other)));

    ClassicalRunOptions bad = opts;
    bad.n_trajectories = 0;
    CHECK_THROWS_AS(classical_ionization_probability(37, strong, bad), ConfigError);
}

TEST_CASE("per-trajectory sink reports every trajectory once") {
    DriveProtocol drive = fixtures::toy_drive(600.0, 12.0);
    ClassicalRunOptions opts;
    opts.n_trajectories = 10;
    opts.integrator.steps_per_cycle = 256;
    int count = 0;
    int ionized = 0;
    opts.per_trajectory = [&](int id, const TrajectoryState& s, bool ion) {
        CHECK(id == count);
        ++count;
        if (ion) ++ionized;
        CHECK(std::isfinite(s.energy()));
    };
    const double p = classical_ionization_probability(37, drive, opts);
    CHECK(count == 10);
    CHECK(p == doctest::Approx(ionized / 10.0).epsilon(1e-15));
}
