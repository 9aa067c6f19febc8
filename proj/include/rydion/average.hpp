#pragma once

#include <array>
#include <map>

#include "rydion/curve.hpp"

// Statistical combination of per-m0 ionization curves into the
// experiment-comparable signal: the microcanonical m0 weights for the
// eight computed |m0| values, and the cavity radial-droop correction.

namespace rydion {

/// The eight computed |m0| values and their statistical weights, stored as
/// exact integer numerators over 1369 = 37^2: 179/1369 for m0 = 0 and
/// (370 - 10|m0|)/1369 otherwise.
struct MWeights {
    static constexpr std::array<int, 8> m0_values{0, 5, 10, 15, 20, 25, 30, 35};
    static constexpr int denominator = 1369;

    static int numerator(int m0_abs);
    static double weight(int m0_abs) {
        return static_cast<double>(numerator(m0_abs)) / denominator;
    }
};

struct WeightReport {
    std::array<int, 8> recomputed_numerators{};
    std::array<int, 8> reference_numerators{};
    int total = 0; // must equal 1369
    bool consistent = false;
};

/// Recompute the weights from first principles (each computed |m0|
/// representing its band of m values with per-m weight (37 - |m|)/1369)
/// and assert equality with MWeights. Throws NumericalError on mismatch.
WeightReport validate_weights();

/// Pointwise weighted average of the eight per-m0 curves (identical grids
/// required; missing m0 or grid mismatch rejected).
IonizationCurve m_average(const std::map<int, IonizationCurve>& curves);

/// Relative field amplitude across the atomic beam: g(rho) = 1 - drop*rho^2
/// with a uniform beam density, integrated by a midpoint rule in rho^2.
struct DroopProfile {
    double drop = 0.07; // g(1) = 1 - drop
    int nodes = 32;

    double g(double rho) const { return 1.0 - drop * rho * rho; }
};

/// Smear a curve over the beam cross section: the corrected value at
/// center field E0 is the weighted sum of curve values at the local fields
/// g(rho_k) E0, rounded to the curve's own grid. Output keeps only the
/// grid points whose smeared range the input covers; an empty result is a
/// coverage error.
IonizationCurve droop_correct(const IonizationCurve& curve,
                              const DroopProfile& profile = {});

} // namespace rydion
