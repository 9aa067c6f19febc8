#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Ionization-probability curves on a uniform field grid (V/cm) and their
// CSV form: optional '#' comment lines, a `field_V_per_cm,p_ion` header,
// one row per grid point.

namespace rydion {

struct CurveMeta {
    int n0 = 0;
    std::string m0_tag;  // "0", "5", ..., "averaged", "microcanonical"
    std::string method;  // "quantum" | "classical"
    bool droop_corrected = false;
};

struct IonizationCurve {
    double field_lo = 0.0; // V/cm
    double step = 1.0;     // V/cm, uniform grid
    std::vector<double> p; // ionization probabilities in [0, 1]
    CurveMeta meta;

    int size() const { return static_cast<int>(p.size()); }
    double field(int i) const { return field_lo + step * i; }
    double field_hi() const { return field(size() - 1); }
    /// index of the grid point nearest to f (clamped into range)
    int nearest_index(double f) const;
    bool same_grid(const IonizationCurve& other) const;

    void validate() const; // grid ascending/uniform, p in [0, 1]
};

/// First grid field where the curve reaches `level` and stays at or above
/// it for the next `persist` grid points; -1 if none.
int onset_index(const IonizationCurve& curve, double level, int persist);

/// Field of the first upward crossing of `level`, linearly interpolated
/// between grid points; NaN if the curve never reaches the level.
double crossing_field(const IonizationCurve& curve, double level);

void write_curve_csv(const IonizationCurve& curve, const std::filesystem::path& file);
IonizationCurve read_curve_csv(const std::filesystem::path& file);

} // namespace rydion
