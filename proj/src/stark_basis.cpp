#include "rydion/stark_basis.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rydion/angular.hpp"
#include "rydion/errors.hpp"
#include "rydion/manifest.hpp"
#include "rydion/radial.hpp"

namespace rydion {

namespace {

constexpr char CACHE_MAGIC[8] = {'R', 'Y', 'D', 'Z', 'C', 'H', '0', '1'};

std::filesystem::path cache_path(const std::filesystem::path& dir, int m,
                                 int n_min, int n_max) {
    std::ostringstream name;
    name << "dipole_m" << std::abs(m) << "_n" << n_min << "-" << n_max << ".bin";
    return dir / name.str();
}

bool load_cached_dipole(const std::filesystem::path& file, int m, int n_min,
                        int n_max, Eigen::MatrixXd& dipole) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return false;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, CACHE_MAGIC, 8) != 0) return false;
    std::int32_t hdr[3];
    std::uint32_t tag_len = 0;
    in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    in.read(reinterpret_cast<char*>(&tag_len), sizeof tag_len);
    if (!in || hdr[0] != std::abs(m) || hdr[1] != n_min || hdr[2] != n_max) return false;
    if (tag_len > 256) return false;
    std::string tag(tag_len, '\0');
    in.read(tag.data(), tag_len);
    if (!in || tag != basis_convention_tag) return false;
    std::uint64_t checksum = 0;
    in.read(reinterpret_cast<char*>(&checksum), sizeof checksum);
    const int dim = n_max - n_min + 1;
    std::vector<double> payload(static_cast<size_t>(dim) * dim);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!in) return false;
    if (fnv1a64(payload.data(), payload.size() * sizeof(double)) != checksum)
        return false;
    dipole = Eigen::Map<Eigen::MatrixXd>(payload.data(), dim, dim);
    return true;
}

void store_cached_dipole(const std::filesystem::path& file, int m, int n_min,
                         int n_max, const Eigen::MatrixXd& dipole) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return; // cache is best-effort
        out.write(CACHE_MAGIC, 8);
        const std::int32_t hdr[3] = {std::abs(m), n_min, n_max};
        const std::string tag = basis_convention_tag;
        const std::uint32_t tag_len = static_cast<std::uint32_t>(tag.size());
        out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
        out.write(reinterpret_cast<const char*>(&tag_len), sizeof tag_len);
        out.write(tag.data(), tag_len);
        const std::uint64_t checksum =
            fnv1a64(dipole.data(), static_cast<size_t>(dipole.size()) * sizeof(double));
        out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
        out.write(reinterpret_cast<const char*>(dipole.data()),
                  static_cast<std::streamsize>(dipole.size() * sizeof(double)));
        if (!out) return;
    }
    std::filesystem::rename(tmp, file, ec);
}

// z matrix over extremal states by accumulating, per angular momentum pair
// (l, l+1), the Gauss-Legendre cross integrals of all radial functions at
// once (one small GEMM per l).
Eigen::MatrixXd compute_dipole(int m_abs, int n_min, int n_max) {
    const int dim = n_max - n_min + 1;
    const RadialGrid grid = make_radial_grid(n_max);
    const int points = static_cast<int>(grid.r.size());

    // sqrt(w r^3), folded symmetrically into both factors of the integrand
    Eigen::VectorXd half_weight(points);
    for (int i = 0; i < points; ++i)
        half_weight(i) = std::sqrt(grid.w[static_cast<size_t>(i)]) *
                         std::pow(grid.r[static_cast<size_t>(i)], 1.5);

    // spherical expansions; coef(a, l) for basis state a = n - n_min
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(dim, n_max);
    for (int n = n_min; n <= n_max; ++n) {
        const SphericalExpansion exp_n = parabolic_to_spherical(extremal_state(n, m_abs));
        for (int l = exp_n.l_min; l <= n - 1; ++l)
            coef(n - n_min, l) = exp_n.coeff(l);
    }

    // weighted radial tables W_l(a, i) = R_{n_a, l}(r_i) sqrt(w_i r_i^3);
    // rows with n <= l stay zero
    auto radial_table = [&](int l) {
        Eigen::MatrixXd table = Eigen::MatrixXd::Zero(dim, points);
        std::vector<double> col;
        for (int n = std::max(n_min, l + 1); n <= n_max; ++n) {
            hydrogen_radial_column(n, l, grid, col);
            for (int i = 0; i < points; ++i)
                table(n - n_min, i) = col[static_cast<size_t>(i)] * half_weight(i);
        }
        return table;
    };

    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd w_lo = radial_table(m_abs);
    for (int l = m_abs; l < n_max - 1; ++l) {
        Eigen::MatrixXd w_hi = radial_table(l + 1);
        const double ang = z_angular_factor(l, l + 1, m_abs);
        // cross integrals I(a,b) = <n_a l| r^3 |n_b l+1> weighted by the
        // expansion coefficients on both sides
        Eigen::MatrixXd cross = w_lo * w_hi.transpose();
        Eigen::MatrixXd term = ang * (coef.col(l).asDiagonal() * cross *
                                      coef.col(l + 1).asDiagonal());
        z += term + term.transpose();
        w_lo = std::move(w_hi);
    }
    // symmetric by construction; symmetrize to make round-off exact
    z = 0.5 * (z + z.transpose()).eval();
    return z;
}

void validate_dipole(const StarkBasis& basis) {
    const int dim = basis.size();
    const double scale = basis.dipole.cwiseAbs().maxCoeff();
    for (int a = 0; a < dim; ++a) {
        const ParabolicState& s = basis.states[static_cast<size_t>(a)];
        const double expected = 1.5 * s.n * (s.n1 - s.n2);
        const double got = basis.dipole(a, a);
        if (std::abs(got - expected) > 1e-8 * std::max(1.0, std::abs(expected))) {
            std::ostringstream msg;
            msg << "build_dipole_matrix: diagonal element for n=" << s.n
                << " is " << got << ", expected 1.5 n (n1 - n2) = " << expected;
            throw NumericalError(msg.str());
        }
        for (int b = 0; b < a; ++b) {
            if (std::abs(basis.dipole(a, b) - basis.dipole(b, a)) > 1e-10 * scale)
                throw NumericalError("build_dipole_matrix: matrix not symmetric");
        }
    }
}

} // namespace

ParabolicState extremal_state(int n, int m) {
    if (n < 1) throw ConfigError("extremal_state: n must be >= 1");
    if (std::abs(m) > n - 1)
        throw ConfigError("extremal_state: |m| must be <= n - 1");
    return ParabolicState{n, n - std::abs(m) - 1, 0, m};
}

SphericalExpansion parabolic_to_spherical(const ParabolicState& s) {
    if (s.n < 1 || s.n1 < 0 || s.n2 < 0 || s.n1 + s.n2 + std::abs(s.m) + 1 != s.n)
        throw ConfigError("parabolic_to_spherical: invalid parabolic state");

    SphericalExpansion out;
    out.n = s.n;
    out.m = s.m;
    out.l_min = std::abs(s.m);
    out.c.resize(static_cast<size_t>(s.n - out.l_min));

    // recoupling of two pseudo-spins j1 = j2 = (n-1)/2 with
    // mu1 = (m + n1 - n2)/2, mu2 = (m - n1 + n2)/2 (twice-values below)
    const int two_j = s.n - 1;
    const int two_mu1 = s.m + s.n1 - s.n2;
    const int two_mu2 = s.m - s.n1 + s.n2;

    double norm = 0.0;
    for (int l = out.l_min; l <= s.n - 1; ++l) {
        const double c = clebsch_gordan_2(two_j, two_mu1, two_j, two_mu2, 2 * l, 2 * s.m);
        out.c[static_cast<size_t>(l - out.l_min)] = c;
        norm += c * c;
    }
    if (std::abs(norm - 1.0) > 1e-10)
        throw NumericalError("parabolic_to_spherical: expansion norm deviates from 1");
    return out;
}

StarkBasis build_dipole_matrix(int m, int n_min, int n_max, const BasisOptions& opts) {
    const int m_abs = std::abs(m);
    const int n_lo = std::max(n_min, m_abs + 1); // |m| <= n - 1 restricts the range
    if (n_max < n_lo || n_min < 1)
        throw ConfigError("build_dipole_matrix: empty basis range");

    StarkBasis basis;
    basis.m = m;
    basis.n_min = n_lo;
    basis.n_max = n_max;
    const int dim = n_max - n_lo + 1;
    basis.states.reserve(static_cast<size_t>(dim));
    basis.energies.resize(dim);
    for (int n = n_lo; n <= n_max; ++n) {
        basis.states.push_back(extremal_state(n, m));
        basis.energies(n - n_lo) = -0.5 / (static_cast<double>(n) * n);
    }

    // the matrix depends on |m| only, so m and -m share a cache entry
    bool cached = false;
    std::filesystem::path file;
    if (opts.cache_dir && !opts.cache_dir->empty()) {
        file = cache_path(*opts.cache_dir, m_abs, n_lo, n_max);
        cached = load_cached_dipole(file, m_abs, n_lo, n_max, basis.dipole);
    }
    if (!cached) {
        basis.dipole = compute_dipole(m_abs, n_lo, n_max);
        if (!file.empty())
            store_cached_dipole(file, m_abs, n_lo, n_max, basis.dipole);
    }

    validate_dipole(basis);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(basis.dipole);
    if (solver.info() != Eigen::Success)
        throw NumericalError("build_dipole_matrix: eigendecomposition failed");
    basis.dipole_eigvecs = solver.eigenvectors();
    basis.dipole_eigvals = solver.eigenvalues();
    return basis;
}

} // namespace rydion
