#include "rydion/classical.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rydion/errors.hpp"
#include "rydion/kepler.hpp"
#include "rydion/rng.hpp"

namespace rydion {

namespace {

constexpr double TWO_PI = 2.0 * std::numbers::pi;

// Kepler's equation M = E - e sin E, safeguarded Newton (monotone in E).
double eccentric_anomaly(double mean_anomaly, double e) {
    double lo = 0.0, hi = TWO_PI;
    double E = mean_anomaly + e * std::sin(mean_anomaly);
    if (!(E > lo) || !(E < hi)) E = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = E - e * std::sin(E) - mean_anomaly;
        if (f > 0.0) hi = E; else lo = E;
        const double df = 1.0 - e * std::cos(E);
        double next = E - f / df;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - E) < 1e-14) return next;
        E = next;
    }
    return E;
}

// force on the electron: Coulomb plus the linearly polarized drive
inline Eigen::Vector3d total_force(const Eigen::Vector3d& r, double g_drive) {
    const double rn = r.norm();
    Eigen::Vector3d f = -r / (rn * rn * rn);
    f.z() -= g_drive;
    return f;
}

TrajectoryState integrate_kepler_split(const TrajectoryState& start,
                                       const DriveProtocol& drive,
                                       const ClassicalOptions& opts) {
    const double period = drive.cycle_period();
    const double dt = period / opts.steps_per_cycle;
    const long n_steps = std::lround(drive.total_cycles * opts.steps_per_cycle);

    Eigen::Vector3d r = start.position;
    Eigen::Vector3d v = start.momentum;
    // kick-drift-kick; times from multiplication, not accumulation
    for (long step = 0; step < n_steps; ++step) {
        const double t0 = start.time_au + step * dt;
        const double t1 = start.time_au + (step + 1) * dt;
        v.z() -= 0.5 * dt * drive.field(t0);
        kepler_drift(r, v, dt);
        v.z() -= 0.5 * dt * drive.field(t1);
    }
    return TrajectoryState{r, v, start.time_au + n_steps * dt};
}

// Dormand-Prince RK5(4) on the Sundman-regularized system
//   dr/ds = r p, dp/ds = r F(r, t), dt/ds = r
// with adaptive steps at relative tolerance opts.rtol.
struct RegularizedState {
    Eigen::Vector3d r, p;
    double t;
};

RegularizedState rkdp_rhs(const RegularizedState& y, const DriveProtocol& drive) {
    const double rn = y.r.norm();
    return {rn * y.p, rn * total_force(y.r, drive.field(y.t)), rn};
}

TrajectoryState integrate_sundman_rkdp(const TrajectoryState& start,
                                       const DriveProtocol& drive,
                                       const ClassicalOptions& opts) {
    static const double A[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double B4[7] = {5179.0 / 57600, 0,           7571.0 / 16695,
                                 393.0 / 640,    -92097.0 / 339200,
                                 187.0 / 2100,   1.0 / 40};
    // B5 equals the last row of A (FSAL pairing not exploited here)

    RegularizedState y{start.position, start.momentum, start.time_au};
    const double t_end = start.time_au + drive.total_time();

    // characteristic scales for the error norm and the step-size guard
    const double e0 = start.energy();
    const double n_act = e0 < 0.0 ? 1.0 / std::sqrt(-2.0 * e0) : 1.0;
    const double pos_scale = n_act * n_act;
    const double mom_scale = 1.0 / n_act;
    const double s_orbit = TWO_PI * n_act; // fictitious-time length of one orbit
    const double h_min = 1e-13 * s_orbit;

    double h = s_orbit / 64.0;
    RegularizedState k[7];
    RegularizedState stage;

    while (t_end - y.t > 1e-3) {
        // aim the step so physical time does not overshoot the protocol end
        const double rn = y.r.norm();
        const double remaining = t_end - y.t;
        if (h * rn > remaining) h = remaining / rn * (1.0 + 1e-9);

        k[0] = rkdp_rhs(y, drive);
        for (int i = 1; i < 7; ++i) {
            stage = y;
            for (int j = 0; j < i; ++j) {
                const double a = h * A[i][j];
                if (a == 0.0) continue;
                stage.r += a * k[j].r;
                stage.p += a * k[j].p;
                stage.t += a * k[j].t;
            }
            k[i] = rkdp_rhs(stage, drive);
        }
        // 5th-order solution is stage 7's base point (B5 = last row of A)
        RegularizedState y5 = stage;
        RegularizedState y4 = y;
        for (int j = 0; j < 7; ++j) {
            const double b = h * B4[j];
            if (b == 0.0) continue;
            y4.r += b * k[j].r;
            y4.p += b * k[j].p;
            y4.t += b * k[j].t;
        }

        double err = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double sr = opts.rtol * (std::abs(y5.r[d]) + pos_scale);
            const double sp = opts.rtol * (std::abs(y5.p[d]) + mom_scale);
            err = std::max(err, std::abs(y5.r[d] - y4.r[d]) / sr);
            err = std::max(err, std::abs(y5.p[d] - y4.p[d]) / sp);
        }
        err = std::max(err, std::abs(y5.t - y4.t) / (opts.rtol * (std::abs(y5.t) + s_orbit)));

        if (err <= 1.0) y = y5;
        const double factor = (err > 0.0)
                                  ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0)
                                  : 5.0;
        h *= factor;
        if (h < h_min) {
            std::ostringstream msg;
            msg << "integrate_trajectory: step-size underflow near the nucleus"
                << " (trajectory " << opts.trajectory_id << ", r = " << y.r.norm()
                << " a.u., t = " << y.t << " a.u.)";
            throw NumericalError(msg.str());
        }
    }
    return TrajectoryState{y.r, y.p, y.t};
}

} // namespace

MicrocanonicalSampler::MicrocanonicalSampler(
    int n0, std::uint64_t seed, std::optional<std::pair<double, double>> lz_window)
    : n0_(n0), lz_window_(lz_window), rng_(seed) {
    if (n0 < 1) throw ConfigError("MicrocanonicalSampler: n0 must be >= 1");
    if (lz_window_ && !(lz_window_->first < lz_window_->second))
        throw ConfigError("MicrocanonicalSampler: empty Lz window");
}

TrajectoryState MicrocanonicalSampler::sample() {
    const double n = n0_;
    const double a = n * n; // semi-major axis at E = -1/(2 n0^2)

    // (L, Lz) flat over the triangle |Lz| <= L <= n0; marginal P(L) ~ L
    double L, Lz;
    for (int attempt = 0;; ++attempt) {
        L = n * std::sqrt(uniform01(rng_));
        Lz = L * (2.0 * uniform01(rng_) - 1.0);
        if (!lz_window_) break;
        if (Lz >= lz_window_->first && Lz <= lz_window_->second) break;
        if (attempt > 1000000)
            throw ConfigError("MicrocanonicalSampler: Lz window has negligible measure");
    }
    if (L < 1e-12 * n) L = 1e-12 * n; // avoid the measure-zero radial orbit

    const double e = std::sqrt(std::max(0.0, 1.0 - (L / n) * (L / n)));
    const double M = TWO_PI * uniform01(rng_);
    const double arg_peri = TWO_PI * uniform01(rng_);
    const double node = TWO_PI * uniform01(rng_);
    const double E = eccentric_anomaly(M, e);

    // in-plane position/velocity at eccentric anomaly E
    const double se = std::sin(E), ce = std::cos(E);
    const double root = std::sqrt(std::max(0.0, 1.0 - e * e));
    const double mean_motion = 1.0 / (n * n * n);
    const double Edot = mean_motion / (1.0 - e * ce);
    Eigen::Vector3d pos(a * (ce - e), a * root * se, 0.0);
    Eigen::Vector3d vel(-a * se * Edot, a * root * ce * Edot, 0.0);

    // rotate by argument of perihelion, inclination (cos i = Lz/L), node
    const double cos_i = (L > 0.0) ? Lz / L : 1.0;
    const double sin_i = std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i));
    auto rotate = [&](const Eigen::Vector3d& u) {
        Eigen::Vector3d w = Eigen::AngleAxisd(arg_peri, Eigen::Vector3d::UnitZ()) * u;
        w = Eigen::AngleAxisd(std::atan2(sin_i, cos_i), Eigen::Vector3d::UnitX()) * w;
        return Eigen::Vector3d(Eigen::AngleAxisd(node, Eigen::Vector3d::UnitZ()) * w);
    };

    TrajectoryState out;
    out.position = rotate(pos);
    out.momentum = rotate(vel);
    out.time_au = 0.0;
    return out;
}

TrajectoryState integrate_trajectory(const TrajectoryState& start,
                                     const DriveProtocol& drive,
                                     const ClassicalOptions& opts) {
    drive.validate();
    if (opts.backend == ClassicalBackend::KeplerSplit) {
        if (opts.steps_per_cycle < 16)
            throw ConfigError("integrate_trajectory: steps_per_cycle must be >= 16");
        return integrate_kepler_split(start, drive, opts);
    }
    return integrate_sundman_rkdp(start, drive, opts);
}

double classical_ionization_probability(int n0, const DriveProtocol& drive,
                                        const ClassicalRunOptions& opts) {
    if (opts.n_trajectories < 1)
        throw ConfigError("classical_ionization_probability: need at least one trajectory");
    int ionized = 0;
    for (int i = 0; i < opts.n_trajectories; ++i) {
        MicrocanonicalSampler sampler(n0, mix_seed(opts.seed, static_cast<std::uint64_t>(i)),
                                      opts.lz_window);
        ClassicalOptions integ = opts.integrator;
        integ.trajectory_id = i;
        const TrajectoryState final_state =
            integrate_trajectory(sampler.sample(), drive, integ);
        const bool ion = final_state.energy() >= 0.0 ||
                         final_state.classical_action() > opts.n_cut;
        if (ion) ++ionized;
        if (opts.per_trajectory) opts.per_trajectory(i, final_state, ion);
    }
    return static_cast<double>(ionized) / opts.n_trajectories;
}

} // namespace rydion
