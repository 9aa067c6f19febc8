#pragma once

#include <cmath>
#include <numbers>

#include "rydion/errors.hpp"

// Drive protocol shared by the quantum and classical dynamics: linearly
// polarized field eps * f(t') * sin(omega t) along z, with the logistic
// switch-on/switch-off envelope f measured in field cycles.

namespace rydion {

struct EnvelopeParams {
    double t_on = 92.22;   // switch-on center, cycles
    double w_on = 13.35;   // switch-on width, cycles
    double t_off = 409.72; // switch-off center, cycles
    double w_off = 15.86;  // switch-off width, cycles

    void validate() const {
        if (!(t_on < t_off))
            throw ConfigError("EnvelopeParams: t_on must be < t_off");
        if (!(w_on > 0.0) || !(w_off > 0.0))
            throw ConfigError("EnvelopeParams: widths must be positive");
    }
};

/// Envelope value at time t_cycles (in field cycles):
/// [1+exp(-(t'-t_on)/w_on)]^-1 - [1+exp(-(t'-t_off)/w_off)]^-1.
inline double envelope(double t_cycles, const EnvelopeParams& p = {}) {
    const double rise = 1.0 / (1.0 + std::exp(-(t_cycles - p.t_on) / p.w_on));
    const double fall = 1.0 / (1.0 + std::exp(-(t_cycles - p.t_off) / p.w_off));
    return rise - fall;
}

struct DriveProtocol {
    double epsilon = 0.0;      // field amplitude, a.u.
    double omega = 0.0;        // angular frequency, a.u.
    EnvelopeParams envelope_params;
    double total_cycles = 500.0;
    int steps_per_cycle = 2000;

    double cycle_period() const { return 2.0 * std::numbers::pi / omega; }
    double total_time() const { return total_cycles * cycle_period(); }

    /// Instantaneous coupling strength eps f(t') sin(omega t); the envelope
    /// clock and the field clock share their origin at t = 0.
    double field(double t_au) const {
        const double t_cycles = t_au * omega / (2.0 * std::numbers::pi);
        return epsilon * envelope(t_cycles, envelope_params) * std::sin(omega * t_au);
    }

    void validate() const {
        if (epsilon < 0.0) throw ConfigError("DriveProtocol: epsilon must be >= 0");
        if (!(omega > 0.0)) throw ConfigError("DriveProtocol: omega must be positive");
        envelope_params.validate();
        if (!(total_cycles > envelope_params.t_off))
            throw ConfigError("DriveProtocol: total_cycles must exceed the switch-off center");
        if (steps_per_cycle < 200)
            throw ConfigError("DriveProtocol: steps_per_cycle must be >= 200");
    }
};

} // namespace rydion
