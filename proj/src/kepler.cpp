#include "rydion/kepler.hpp"

#include <cmath>

#include "rydion/errors.hpp"

namespace rydion {

namespace {

// Stumpff functions C(z) = (1 - cos sqrt(z))/z and
// S(z) = (sqrt(z) - sin sqrt(z))/z^(3/2), continued to z <= 0.
void stumpff(double z, double& C, double& S) {
    if (std::abs(z) < 1e-6) {
        C = 0.5 - z / 24.0 + z * z / 720.0;
        S = 1.0 / 6.0 - z / 120.0 + z * z / 5040.0;
    } else if (z > 0.0) {
        const double sz = std::sqrt(z);
        C = (1.0 - std::cos(sz)) / z;
        S = (sz - std::sin(sz)) / (z * sz);
    } else {
        const double sz = std::sqrt(-z);
        C = (std::cosh(sz) - 1.0) / (-z);
        S = (std::sinh(sz) - sz) / (-z * sz);
    }
}

} // namespace

void kepler_drift(Eigen::Vector3d& r, Eigen::Vector3d& v, double dt) {
    if (dt == 0.0) return;
    if (dt < 0.0) {
        // backward drift = time reversal of a forward drift
        v = -v;
        kepler_drift(r, v, -dt);
        v = -v;
        return;
    }

    const double r0 = r.norm();
    if (!(r0 > 0.0))
        throw NumericalError("kepler_drift: zero radius (collision)");
    const double rv0 = r.dot(v);        // r0 * radial velocity
    const double alpha = 2.0 / r0 - v.squaredNorm(); // 1/a, > 0 for bound motion

    // universal Kepler equation F(chi) = dt, F monotone increasing
    auto eval = [&](double chi, double& F, double& dF) {
        const double z = alpha * chi * chi;
        double C, S;
        stumpff(z, C, S);
        F = rv0 * chi * chi * C + (1.0 - alpha * r0) * chi * chi * chi * S +
            r0 * chi - dt;
        dF = rv0 * chi * (1.0 - z * S) + (1.0 - alpha * r0) * chi * chi * C + r0;
    };

    // bracket the root: F(0) = -dt < 0
    double chi = std::abs(alpha) > 1e-12 ? dt * alpha : dt / r0;
    if (chi <= 0.0) chi = dt / r0;
    double lo = 0.0, hi = chi;
    double F, dF;
    eval(hi, F, dF);
    int guard = 0;
    while (F < 0.0) {
        lo = hi;
        hi *= 2.0;
        eval(hi, F, dF);
        if (++guard > 200)
            throw NumericalError("kepler_drift: failed to bracket universal anomaly");
    }

    // safeguarded Newton to machine precision
    chi = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        eval(chi, F, dF);
        if (F > 0.0) hi = chi; else lo = chi;
        double step = F / dF;
        double next = chi - step;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - chi) <= 1e-15 * std::abs(chi)) {
            chi = next;
            break;
        }
        chi = next;
        if (it == 199)
            throw NumericalError("kepler_drift: universal Kepler equation did not converge");
    }

    const double z = alpha * chi * chi;
    double C, S;
    stumpff(z, C, S);
    const double f = 1.0 - chi * chi * C / r0;
    const double g = dt - chi * chi * chi * S;

    const Eigen::Vector3d r_new = f * r + g * v;
    const double rn = r_new.norm();
    if (!(rn > 0.0))
        throw NumericalError("kepler_drift: propagated through collision");
    const double fdot = chi * (z * S - 1.0) / (rn * r0);
    const double gdot = 1.0 - chi * chi * C / rn;

    const Eigen::Vector3d v_new = fdot * r + gdot * v;
    r = r_new;
    v = v_new;
}

} // namespace rydion
