#include "rydion/average.hpp"

#include <cmath>
#include <sstream>

#include "rydion/errors.hpp"

namespace rydion {

int MWeights::numerator(int m0_abs) {
    if (m0_abs == 0) return 179;
    for (int v : m0_values)
        if (v == m0_abs) return 370 - 10 * m0_abs;
    throw ConfigError("MWeights: m0 = " + std::to_string(m0_abs) +
                      " is not one of the computed values");
}

WeightReport validate_weights() {
    WeightReport report;
    // every m in -36..36 carries (37 - |m|)/1369; each computed |m0|
    // stands in for its band of nearby m values
    auto band_weight = [](int m_lo, int m_hi) {
        int sum = 0;
        for (int m = m_lo; m <= m_hi; ++m) sum += 37 - std::abs(m);
        return sum;
    };

    for (size_t i = 0; i < MWeights::m0_values.size(); ++i) {
        const int m0 = MWeights::m0_values[i];
        int num = 0;
        if (m0 == 0) {
            num = band_weight(-2, 2);
        } else if (m0 == 35) {
            num = band_weight(33, 36) + band_weight(-36, -33);
        } else {
            num = band_weight(m0 - 2, m0 + 2) + band_weight(-m0 - 2, -m0 + 2);
        }
        report.recomputed_numerators[i] = num;
        report.reference_numerators[i] = MWeights::numerator(m0);
        report.total += num;
    }
    report.consistent = report.total == MWeights::denominator &&
                        report.recomputed_numerators == report.reference_numerators;
    if (!report.consistent) {
        std::ostringstream msg;
        msg << "validate_weights: recomputed weights disagree with the reference table"
            << " (total " << report.total << "/" << MWeights::denominator << ")";
        throw NumericalError(msg.str());
    }
    return report;
}

IonizationCurve m_average(const std::map<int, IonizationCurve>& curves) {
    const IonizationCurve* first = nullptr;
    for (int m0 : MWeights::m0_values) {
        auto it = curves.find(m0);
        if (it == curves.end())
            throw ConfigError("m_average: missing curve for m0 = " + std::to_string(m0));
        it->second.validate();
        if (!first) {
            first = &it->second;
        } else if (!first->same_grid(it->second)) {
            throw ConfigError("m_average: field grid mismatch for m0 = " +
                              std::to_string(m0));
        }
    }

    IonizationCurve out;
    out.field_lo = first->field_lo;
    out.step = first->step;
    out.p.assign(first->p.size(), 0.0);
    out.meta = first->meta;
    out.meta.m0_tag = "averaged";
    for (int m0 : MWeights::m0_values) {
        const IonizationCurve& c = curves.at(m0);
        const double w = MWeights::weight(m0);
        for (size_t i = 0; i < out.p.size(); ++i) out.p[i] += w * c.p[i];
    }
    return out;
}

IonizationCurve droop_correct(const IonizationCurve& curve, const DroopProfile& profile) {
    curve.validate();
    if (profile.nodes < 1) throw ConfigError("droop_correct: need at least one node");
    if (profile.drop < 0.0 || profile.drop >= 1.0)
        throw ConfigError("droop_correct: drop must be in [0, 1)");

    // midpoint rule in u = rho^2 with uniform beam density: equal weights
    std::vector<double> g_k(static_cast<size_t>(profile.nodes));
    for (int k = 0; k < profile.nodes; ++k) {
        const double u = (k + 0.5) / profile.nodes;
        g_k[static_cast<size_t>(k)] = 1.0 - profile.drop * u;
    }

    // a center field is usable when every smeared sample lands on the grid
    IonizationCurve out;
    out.step = curve.step;
    out.meta = curve.meta;
    out.meta.droop_corrected = true;

    const double w = 1.0 / profile.nodes;
    bool started = false;
    for (int i = 0; i < curve.size(); ++i) {
        const double e0 = curve.field(i);
        // nearest-grid rounding of the lowest local field must stay inside
        // the curve; smeared fields never exceed e0 itself
        const double lowest = (1.0 - profile.drop) * e0;
        if (std::lround((lowest - curve.field_lo) / curve.step) < 0) continue;
        double acc = 0.0;
        const int idx0 = curve.nearest_index(g_k[0] * e0);
        bool degenerate = true;
        for (double g : g_k) {
            const int idx = curve.nearest_index(g * e0);
            degenerate = degenerate && idx == idx0;
            acc += curve.p[static_cast<size_t>(idx)];
        }
        if (!started) {
            out.field_lo = e0;
            started = true;
        }
        // all samples on one grid point (e.g. zero droop): exact identity
        out.p.push_back(degenerate ? curve.p[static_cast<size_t>(idx0)] : acc * w);
    }
    if (!started)
        throw ConfigError("droop_correct: curve grid does not cover the smeared "
                          "field range of any grid point");
    return out;
}

} // namespace rydion
