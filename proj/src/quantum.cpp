#include "rydion/quantum.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "rydion/errors.hpp"
#include "rydion/units.hpp"

namespace rydion {

namespace {

using Eigen::ArrayXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// State as separate real/imaginary parts so the rotations into the dipole
// eigenbasis stay real GEMVs.
struct SplitState {
    VectorXd re, im;

    void load(const VectorXcd& c) {
        re = c.real();
        im = c.imag();
    }
    VectorXcd store() const {
        VectorXcd c(re.size());
        c.real() = re;
        c.imag() = im;
        return c;
    }
    double norm_sq() const { return re.squaredNorm() + im.squaredNorm(); }
};

// (re + i im) *= exp(-i phi) elementwise
inline void apply_phase(VectorXd& re, VectorXd& im, const ArrayXd& cos_phi,
                        const ArrayXd& sin_phi) {
    ArrayXd r = re.array() * cos_phi + im.array() * sin_phi;
    im.array() = im.array() * cos_phi - re.array() * sin_phi;
    re = r;
}

class Stepper {
public:
    virtual ~Stepper() = default;
    /// advance by n steps of size dt starting at time t_au
    virtual void advance(SplitState& s, double t_au, int n_steps, double dt) = 0;
};

class SplitStepper final : public Stepper {
public:
    SplitStepper(const StarkBasis& basis, const DriveProtocol& drive, int order)
        : basis_(basis), drive_(drive), order_(order) {
        if (order != 2 && order != 4)
            throw ConfigError("propagate: splitting_order must be 2 or 4");
        // Yoshida triple-jump coefficients (order 4); order 2 uses w = 1
        if (order == 4) {
            const double cbrt2 = std::cbrt(2.0);
            const double w1 = 1.0 / (2.0 - cbrt2);
            weights_ = {w1, 1.0 - 2.0 * w1, w1};
        } else {
            weights_ = {1.0};
        }
    }

    void advance(SplitState& s, double t_au, int n_steps, double dt) override {
        prepare(dt);
        double t = t_au;
        for (int step = 0; step < n_steps; ++step) {
            double t_sub = t;
            for (size_t k = 0; k < weights_.size(); ++k) {
                strang_substep(s, t_sub, k);
                t_sub += weights_[k] * dt;
            }
            t += dt;
        }
    }

private:
    void prepare(double dt) {
        if (dt == prepared_dt_) return;
        prepared_dt_ = dt;
        cos_half_.clear();
        sin_half_.clear();
        for (double w : weights_) {
            ArrayXd phi = 0.5 * w * dt * basis_.energies.array();
            cos_half_.push_back(phi.cos());
            sin_half_.push_back(phi.sin());
        }
    }

    // exp(-i H0 h/2) exp(-i theta Z) exp(-i H0 h/2) with
    // theta = integral of eps f sin(w t) over the substep (envelope frozen
    // at the substep midpoint, carrier integrated exactly)
    void strang_substep(SplitState& s, double t, size_t k) {
        const double h = weights_[k] * prepared_dt_;
        const double w = drive_.omega;
        const double f_mid = envelope((t + 0.5 * h) * w / (2.0 * std::numbers::pi),
                                      drive_.envelope_params);
        const double theta =
            drive_.epsilon * f_mid * (std::cos(w * t) - std::cos(w * (t + h))) / w;

        apply_phase(s.re, s.im, cos_half_[k], sin_half_[k]);
        if (theta != 0.0) {
            tmp_re_.noalias() = basis_.dipole_eigvecs.transpose() * s.re;
            tmp_im_.noalias() = basis_.dipole_eigvecs.transpose() * s.im;
            ArrayXd phi = theta * basis_.dipole_eigvals.array();
            ArrayXd c = phi.cos();
            ArrayXd sn = phi.sin();
            apply_phase(tmp_re_, tmp_im_, c, sn);
            s.re.noalias() = basis_.dipole_eigvecs * tmp_re_;
            s.im.noalias() = basis_.dipole_eigvecs * tmp_im_;
        }
        apply_phase(s.re, s.im, cos_half_[k], sin_half_[k]);
    }

    const StarkBasis& basis_;
    const DriveProtocol& drive_;
    int order_;
    std::vector<double> weights_;
    double prepared_dt_ = 0.0;
    std::vector<ArrayXd> cos_half_, sin_half_;
    VectorXd tmp_re_, tmp_im_;
};

class Rk4Stepper final : public Stepper {
public:
    Rk4Stepper(const StarkBasis& basis, const DriveProtocol& drive)
        : basis_(basis), drive_(drive) {}

    void advance(SplitState& s, double t_au, int n_steps, double dt) override {
        double t = t_au;
        for (int step = 0; step < n_steps; ++step) {
            rhs(s.re, s.im, t, k1r_, k1i_);
            ar_ = s.re + 0.5 * dt * k1r_;
            ai_ = s.im + 0.5 * dt * k1i_;
            rhs(ar_, ai_, t + 0.5 * dt, k2r_, k2i_);
            ar_ = s.re + 0.5 * dt * k2r_;
            ai_ = s.im + 0.5 * dt * k2i_;
            rhs(ar_, ai_, t + 0.5 * dt, k3r_, k3i_);
            ar_ = s.re + dt * k3r_;
            ai_ = s.im + dt * k3i_;
            rhs(ar_, ai_, t + dt, k4r_, k4i_);
            s.re += (dt / 6.0) * (k1r_ + 2.0 * k2r_ + 2.0 * k3r_ + k4r_);
            s.im += (dt / 6.0) * (k1i_ + 2.0 * k2i_ + 2.0 * k3i_ + k4i_);
            t += dt;
        }
    }

private:
    // dc/dt = -i (E + g(t) Z) c, split into real equations
    void rhs(const VectorXd& cr, const VectorXd& ci, double t, VectorXd& outr,
             VectorXd& outi) {
        const double g = drive_.field(t);
        hr_ = basis_.energies.cwiseProduct(cr);
        hi_ = basis_.energies.cwiseProduct(ci);
        if (g != 0.0) {
            hr_.noalias() += g * (basis_.dipole * cr);
            hi_.noalias() += g * (basis_.dipole * ci);
        }
        outr = hi_;
        outi = -hr_;
    }

    const StarkBasis& basis_;
    const DriveProtocol& drive_;
    VectorXd k1r_, k1i_, k2r_, k2i_, k3r_, k3i_, k4r_, k4i_, ar_, ai_, hr_, hi_;
};

std::unique_ptr<Stepper> make_stepper(const StarkBasis& basis, const DriveProtocol& drive,
                                      QuantumBackend backend, int order) {
    if (backend == QuantumBackend::SplitOperator)
        return std::make_unique<SplitStepper>(basis, drive, order);
    return std::make_unique<Rk4Stepper>(basis, drive);
}

} // namespace

Eigen::VectorXcd schrodinger_rhs(const Eigen::VectorXcd& c, const StarkBasis& basis,
                                 const DriveProtocol& drive, double t_au) {
    if (c.size() != basis.size())
        throw ConfigError("schrodinger_rhs: state dimension does not match basis");
    const std::complex<double> minus_i(0.0, -1.0);
    VectorXcd hc = basis.energies.cwiseProduct(c.real()).cast<std::complex<double>>();
    hc.imag() = basis.energies.cwiseProduct(c.imag());
    const double g = drive.field(t_au);
    if (g != 0.0) {
        hc.real() += g * (basis.dipole * c.real());
        hc.imag() += g * (basis.dipole * c.imag());
    }
    return minus_i * hc;
}

PropagationResult propagate(const StarkBasis& basis, const DriveProtocol& drive,
                            const PropagateOptions& opts) {
    drive.validate();
    const int idx0 = basis.index_of(opts.n0);
    if (idx0 < 0)
        throw ConfigError("propagate: n0 outside the basis range");

    const int dim = basis.size();
    SplitState state;
    state.re = VectorXd::Zero(dim);
    state.im = VectorXd::Zero(dim);
    state.re(idx0) = 1.0;

    // indices at or above the absorbing boundary
    std::vector<int> absorb_idx;
    for (int i = 0; i < dim; ++i)
        if (basis.n_of(i) >= opts.n_cut) absorb_idx.push_back(i);

    auto stepper = make_stepper(basis, drive, opts.backend, opts.splitting_order);
    const double dt = drive.cycle_period() / drive.steps_per_cycle;

    PropagationResult res;
    double absorbed = 0.0;
    const int full_cycles = static_cast<int>(std::floor(drive.total_cycles + 1e-9));
    const double frac = drive.total_cycles - full_cycles;

    auto bound_prob = [&]() {
        double p = 0.0;
        for (int i = 0; i < dim; ++i)
            if (basis.n_of(i) < opts.n_cut)
                p += state.re(i) * state.re(i) + state.im(i) * state.im(i);
        return p;
    };

    auto end_of_cycle = [&](int cycle_number) {
        const double norm = state.norm_sq();
        const double defect = std::abs(norm + absorbed - 1.0);
        res.max_norm_defect = std::max(res.max_norm_defect, defect);
        if (!(defect <= 1e-4)) { // negated so NaN amplitudes also fail
            std::ostringstream msg;
            msg << "propagate: norm drift " << defect << " at cycle " << cycle_number
                << " (eps = " << drive.epsilon << " a.u. = "
                << units::field_from_au(drive.epsilon)
                << " V/cm); increase steps_per_cycle";
            throw NumericalError(msg.str());
        }
        if (opts.absorber) {
            double removed = 0.0;
            for (int i : absorb_idx) {
                removed += state.re(i) * state.re(i) + state.im(i) * state.im(i);
                state.re(i) = 0.0;
                state.im(i) = 0.0;
            }
            absorbed += removed;
        }
        if (opts.trace)
            opts.trace(CycleTrace{cycle_number, norm, absorbed, bound_prob()});
    };

    const double period = drive.cycle_period();
    for (int cycle = 0; cycle < full_cycles; ++cycle) {
        stepper->advance(state, cycle * period, drive.steps_per_cycle, dt);
        end_of_cycle(cycle + 1);
    }
    if (frac > 1e-9) {
        const int tail_steps = std::max(1, static_cast<int>(std::lround(frac * drive.steps_per_cycle)));
        stepper->advance(state, full_cycles * period, tail_steps,
                         frac * period / tail_steps);
        end_of_cycle(full_cycles + 1);
    }

    res.cycles_completed = full_cycles;
    res.absorbed = absorbed;
    res.bound_prob = bound_prob();
    // clamp round-off: a fully bound state can sum to 1 + O(1e-15)
    res.p_ion = std::min(1.0, std::max(0.0, 1.0 - res.bound_prob));
    res.final_amplitudes = state.store();
    return res;
}

Eigen::VectorXcd evolve_state(const StarkBasis& basis, const DriveProtocol& drive,
                              const Eigen::VectorXcd& c0, double t0_cycles,
                              double t1_cycles, QuantumBackend backend,
                              int splitting_order) {
    if (c0.size() != basis.size())
        throw ConfigError("evolve_state: state dimension does not match basis");
    const double period = drive.cycle_period();
    const double span = t1_cycles - t0_cycles;
    const int n_steps = std::max(
        1, static_cast<int>(std::lround(std::abs(span) * drive.steps_per_cycle)));
    const double dt = span * period / n_steps;

    SplitState state;
    state.load(c0);
    auto stepper = make_stepper(basis, drive, backend, splitting_order);
    stepper->advance(state, t0_cycles * period, n_steps, dt);
    return state.store();
}

ConvergencePair convergence_pair(int m, int n0, const DriveProtocol& drive, int n_min,
                                 int n_small, int n_large, const BasisOptions& basis_opts,
                                 const PropagateOptions& opts) {
    PropagateOptions local = opts;
    local.n0 = n0;
    ConvergencePair pair{};
    {
        StarkBasis basis = build_dipole_matrix(m, n_min, n_small, basis_opts);
        pair.p_small = propagate(basis, drive, local).p_ion;
    }
    {
        StarkBasis basis = build_dipole_matrix(m, n_min, n_large, basis_opts);
        pair.p_large = propagate(basis, drive, local).p_ion;
    }
    return pair;
}

} // namespace rydion
