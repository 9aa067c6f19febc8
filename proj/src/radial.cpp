#include "rydion/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rydion/errors.hpp"

namespace rydion {

namespace {

// Nodes/weights of q-point Gauss-Legendre on (-1, 1), by Newton iteration
// on P_q. Symmetric pairs are filled from one half.
struct GaussRule {
    std::vector<double> x, w;
};

GaussRule gauss_legendre(int q) {
    GaussRule rule;
    rule.x.resize(q);
    rule.w.resize(q);
    const int half = (q + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-style initial guess for the i-th root
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // evaluate P_q and P_q' by upward recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[q - 1 - i] = x;
        const double wi = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = wi;
        rule.w[q - 1 - i] = wi;
    }
    return rule;
}

constexpr int PANEL_POINTS = 24;
constexpr double R_FIRST_PANEL = 0.05;

// Generalized Laguerre L_k^{(alpha)}(x) with scaling against overflow.
// Returns sign and log|L|; log is -inf for an exact zero.
struct ScaledValue {
    double sign;
    double log_mag;
};

ScaledValue laguerre_scaled(int k, double alpha, double x) {
    double prev = 1.0;                     // L_0
    if (k == 0) return {1.0, 0.0};
    double cur = 1.0 + alpha - x;          // L_1
    double log_scale = 0.0;
    constexpr double BIG = 1e250;
    constexpr double LOG_BIG = 575.6462732485114; // log(1e250)
    for (int j = 1; j < k; ++j) {
        double next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
        double mag = std::max(std::abs(prev), std::abs(cur));
        if (mag > BIG) {
            prev /= BIG;
            cur /= BIG;
            log_scale += LOG_BIG;
        }
    }
    if (cur == 0.0) return {1.0, -std::numeric_limits<double>::infinity()};
    return {cur > 0.0 ? 1.0 : -1.0, std::log(std::abs(cur)) + log_scale};
}

// log of the normalization constant (2/n^2) sqrt((n-l-1)!/(n+l)!)
double log_radial_norm(int n, int l) {
    return std::numbers::ln2 - 2.0 * std::log(static_cast<double>(n)) +
           0.5 * (std::lgamma(static_cast<double>(n - l)) -
                  std::lgamma(static_cast<double>(n + l + 1)));
}

double radial_value(int n, int l, double r, double log_norm) {
    const int k = n - l - 1;
    const double x = 2.0 * r / n;
    const ScaledValue lag = laguerre_scaled(k, 2.0 * l + 1.0, x);
    const double log_mag = log_norm + l * std::log(x) - r / n + lag.log_mag;
    if (log_mag < -700.0) return 0.0;
    // leading-coefficient-positive convention: extra (-1)^k on the
    // conventional Laguerre sign
    const double sign = (k & 1) ? -lag.sign : lag.sign;
    return sign * std::exp(log_mag);
}

void validate_bound_state(int n, int l, const char* who) {
    if (n < 1 || l < 0 || l > n - 1)
        throw ConfigError(std::string(who) + ": invalid bound state (n, l)");
}

} // namespace

RadialGrid make_radial_grid(int n_max) {
    if (n_max < 1) throw ConfigError("make_radial_grid: n_max must be >= 1");
    // ~3 n^2 for large n; the classically forbidden tail needs extra decay
    // lengths at small n
    const double nd = n_max;
    const double r_max = std::max(3.0 * nd * nd, 2.0 * nd * nd + 25.0 * nd);
    const int panels = std::max(320, static_cast<int>(2.4 * n_max));
    static const GaussRule rule = gauss_legendre(PANEL_POINTS);

    RadialGrid grid;
    grid.r_max = r_max;
    grid.r.reserve(static_cast<size_t>(panels) * PANEL_POINTS);
    grid.w.reserve(static_cast<size_t>(panels) * PANEL_POINTS);

    // panel edges: [0, r_a], then geometric up to r_max
    const double growth = std::pow(r_max / R_FIRST_PANEL, 1.0 / (panels - 1));
    double lo = 0.0;
    double hi = R_FIRST_PANEL;
    for (int p = 0; p < panels; ++p) {
        const double mid = 0.5 * (lo + hi);
        const double halfwidth = 0.5 * (hi - lo);
        for (int i = 0; i < PANEL_POINTS; ++i) {
            grid.r.push_back(mid + halfwidth * rule.x[i]);
            grid.w.push_back(halfwidth * rule.w[i]);
        }
        lo = hi;
        hi = (p == panels - 2) ? r_max : hi * growth;
    }
    return grid;
}

double hydrogen_radial(int n, int l, double r) {
    validate_bound_state(n, l, "hydrogen_radial");
    if (r < 0.0) throw ConfigError("hydrogen_radial: r must be >= 0");
    if (r == 0.0) return l == 0 ? ((n & 1) ? 1.0 : -1.0) * 2.0 * std::pow(n, -1.5) : 0.0;
    return radial_value(n, l, r, log_radial_norm(n, l));
}

void hydrogen_radial_column(int n, int l, const RadialGrid& grid,
                            std::vector<double>& out) {
    validate_bound_state(n, l, "hydrogen_radial_column");
    const double log_norm = log_radial_norm(n, l);
    out.resize(grid.r.size());
    for (size_t i = 0; i < grid.r.size(); ++i)
        out[i] = radial_value(n, l, grid.r[i], log_norm);
}

double radial_dipole_on_grid(int n, int l, int n2, int l2, const RadialGrid& grid) {
    validate_bound_state(n, l, "radial_dipole");
    validate_bound_state(n2, l2, "radial_dipole");
    if (std::abs(l - l2) != 1)
        throw ConfigError("radial_dipole: selection rule requires |l - l2| = 1");
    const double log_norm1 = log_radial_norm(n, l);
    const double log_norm2 = log_radial_norm(n2, l2);
    double sum = 0.0;
    for (size_t i = 0; i < grid.r.size(); ++i) {
        const double r = grid.r[i];
        const double f1 = radial_value(n, l, r, log_norm1);
        if (f1 == 0.0) continue;
        const double f2 = radial_value(n2, l2, r, log_norm2);
        sum += grid.w[i] * f1 * f2 * r * r * r;
    }
    return sum;
}

double radial_dipole(int n, int l, int n2, int l2) {
    const RadialGrid grid = make_radial_grid(std::max(n, n2));
    return radial_dipole_on_grid(n, l, n2, l2, grid);
}

} // namespace rydion
