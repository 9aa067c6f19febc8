#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "rydion/errors.hpp"
#include "rydion/stark_basis.hpp"

using namespace rydion;

TEST_CASE("extremal states: n2 = 0, n1 forced by the shell constraint") {
    ParabolicState s = extremal_state(37, 0);
    CHECK(s.n1 == 36);
    CHECK(s.n2 == 0);
    CHECK(s.m == 0);

    s = extremal_state(37, 36); // circular-like, the only state of its m
    CHECK(s.n1 == 0);
    CHECK(s.n2 == 0);

    s = extremal_state(30, 10);
    CHECK(s.n1 == 19);
    CHECK(s.n2 == 0);

    CHECK_THROWS_AS(extremal_state(37, 37), ConfigError);
    CHECK_THROWS_AS(extremal_state(5, -5), ConfigError);
    CHECK_THROWS_AS(extremal_state(0, 0), ConfigError);
}

TEST_CASE("spherical expansion: single-manifold cases and unit norm") {
    const SphericalExpansion ground = parabolic_to_spherical(ParabolicState{1, 0, 0, 0});
    CHECK(ground.c.size() == 1);
    CHECK(ground.coeff(0) == doctest::Approx(1.0).epsilon(1e-14));

    // n = 2, (n1, n2) = (1, 0): equal weights on s and p, both positive in
    // the Condon-Shortley convention
    const SphericalExpansion two = parabolic_to_spherical(ParabolicState{2, 1, 0, 0});
    CHECK(two.coeff(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(two.coeff(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

    // general parabolic states at modest n (the alternating recoupling sum
    // loses digits for large non-extremal states, which the basis never uses)
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 20);
        const int m = static_cast<int>(rng() % (2 * static_cast<unsigned>(n) - 1)) - (n - 1);
        const int n1 = static_cast<int>(rng() % static_cast<unsigned>(n - std::abs(m)));
        const ParabolicState s{n, n1, n - n1 - std::abs(m) - 1, m};
        const SphericalExpansion e = parabolic_to_spherical(s);
        double norm = 0.0;
        for (double c : e.c) norm += c * c;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
    }

    // extremal states (stretched recoupling, single-term coefficients) stay
    // accurate through the largest production manifolds
    for (int n : {30, 37, 91, 100, 150}) {
        for (int m : {0, -5, 10, n - 1}) {
            const SphericalExpansion e = parabolic_to_spherical(extremal_state(n, m));
            double norm = 0.0;
            for (double c : e.c) norm += c * c;
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
        }
    }

    CHECK_THROWS_AS(parabolic_to_spherical(ParabolicState{3, 2, 2, 0}), ConfigError);
}

TEST_CASE("dipole matrix: Stark diagonal, symmetry, determinism") {
    const StarkBasis basis = build_dipole_matrix(0, 30, 45);
    REQUIRE(basis.size() == 16);

    // first-order Stark dipole (3/2) n (n1 - n2) on the diagonal
    for (int i = 0; i < basis.size(); ++i) {
        const ParabolicState& s = basis.states[static_cast<size_t>(i)];
        CHECK(basis.dipole(i, i) ==
              doctest::Approx(1.5 * s.n * (s.n1 - s.n2)).epsilon(1e-8));
    }
    // n = 37, m = 0: (3/2) * 37 * 36 = 1998
    CHECK(basis.dipole(7, 7) == doctest::Approx(1998.0).epsilon(1e-8));

    for (int a = 0; a < basis.size(); ++a)
        for (int b = 0; b < basis.size(); ++b)
            CHECK(basis.dipole(a, b) == basis.dipole(b, a));

    // energies
    CHECK(basis.energies(7) == doctest::Approx(-0.5 / (37.0 * 37.0)).epsilon(1e-14));

    // identical inputs give bit-identical matrices
    const StarkBasis again = build_dipole_matrix(0, 30, 45);
    CHECK(std::memcmp(basis.dipole.data(), again.dipole.data(),
                      sizeof(double) * static_cast<size_t>(basis.dipole.size())) == 0);

    // eigendecomposition reconstructs the matrix
    const Eigen::MatrixXd recon = basis.dipole_eigvecs *
                                  basis.dipole_eigvals.asDiagonal() *
                                  basis.dipole_eigvecs.transpose();
    CHECK((recon - basis.dipole).cwiseAbs().maxCoeff() < 1e-8 *
              basis.dipole.cwiseAbs().maxCoeff());
}

TEST_CASE("dipole matrix depends on |m| only") {
    const StarkBasis plus = build_dipole_matrix(5, 30, 40);
    const StarkBasis minus = build_dipole_matrix(-5, 30, 40);
    CHECK((plus.dipole - minus.dipole).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("basis range is clipped to |m| <= n - 1") {
    const StarkBasis basis = build_dipole_matrix(36, 30, 40);
    CHECK(basis.n_min == 37);
    CHECK(basis.size() == 4);
    CHECK(basis.index_of(36) == -1);
    CHECK_THROWS_AS(build_dipole_matrix(45, 30, 40), ConfigError);
}

TEST_CASE("dipole cache round-trips and rejects corruption") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "rydion_cache_test";
    std::filesystem::remove_all(dir);
    BasisOptions opts;
    opts.cache_dir = dir;

    const StarkBasis fresh = build_dipole_matrix(2, 30, 38, opts);
    const std::filesystem::path file = dir / "dipole_m2_n30-38.bin";
    REQUIRE(std::filesystem::exists(file));

    const StarkBasis cached = build_dipole_matrix(2, 30, 38, opts);
    CHECK(std::memcmp(fresh.dipole.data(), cached.dipole.data(),
                      sizeof(double) * static_cast<size_t>(fresh.dipole.size())) == 0);

    // corrupt one payload byte: the checksum must reject the file and the
    // matrix must be rebuilt instead
    {
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-9, std::ios::end);
        char byte = 0;
        f.read(&byte, 1);
        f.seekp(-9, std::ios::end);
        byte = static_cast<char>(byte ^ 0x5a);
        f.write(&byte, 1);
    }
    const StarkBasis rebuilt = build_dipole_matrix(2, 30, 38, opts);
    CHECK((rebuilt.dipole - fresh.dipole).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove_all(dir);
}
