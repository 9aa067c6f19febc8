#pragma once

#include <numbers>

#include "rydion/errors.hpp"

// Conversions between laboratory units (V/cm, GHz, field cycles) and the
// atomic units used by the dynamics code. Conversion happens exactly once,
// at the configuration boundary; everything downstream is a.u. only.

namespace rydion::units {

// CODATA 2018 values, full published precision.
inline constexpr double atomic_field_V_per_m  = 5.14220674763e11;
inline constexpr double atomic_field_V_per_cm = atomic_field_V_per_m / 100.0;
inline constexpr double atomic_time_s         = 2.4188843265857e-17;

inline constexpr double field_au_per_V_per_cm = 1.0 / atomic_field_V_per_cm;

/// Microwave field amplitude, V/cm -> a.u.
inline double field_to_au(double f_V_per_cm) {
    if (f_V_per_cm < 0.0)
        throw ConfigError("field_to_au: negative field amplitude");
    return f_V_per_cm * field_au_per_V_per_cm;
}

/// Microwave field amplitude, a.u. -> V/cm.
inline double field_from_au(double f_au) {
    if (f_au < 0.0)
        throw ConfigError("field_from_au: negative field amplitude");
    return f_au * atomic_field_V_per_cm;
}

/// Frequency in GHz -> angular frequency in a.u.
inline double frequency_to_au(double nu_GHz) {
    if (!(nu_GHz > 0.0))
        throw ConfigError("frequency_to_au: frequency must be positive");
    return 2.0 * std::numbers::pi * nu_GHz * 1e9 * atomic_time_s;
}

/// Angular frequency in a.u. -> frequency in GHz.
inline double frequency_from_au(double omega_au) {
    if (!(omega_au > 0.0))
        throw ConfigError("frequency_from_au: angular frequency must be positive");
    return omega_au / (2.0 * std::numbers::pi * 1e9 * atomic_time_s);
}

} // namespace rydion::units
