#include "rydion/curve.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rydion/errors.hpp"

namespace rydion {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

int IonizationCurve::nearest_index(double f) const {
    if (p.empty()) return -1;
    const int i = static_cast<int>(std::lround((f - field_lo) / step));
    return std::max(0, std::min(size() - 1, i));
}

bool IonizationCurve::same_grid(const IonizationCurve& other) const {
    return size() == other.size() && std::abs(field_lo - other.field_lo) < 1e-9 &&
           std::abs(step - other.step) < 1e-12;
}

void IonizationCurve::validate() const {
    if (p.empty()) throw ConfigError("IonizationCurve: empty curve");
    if (!(step > 0.0)) throw ConfigError("IonizationCurve: grid step must be positive");
    if (field_lo < 0.0) throw ConfigError("IonizationCurve: negative field");
    for (size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= -1e-12) || !(p[i] <= 1.0 + 1e-12))
            throw ConfigError("IonizationCurve: probability outside [0, 1] at row " +
                              std::to_string(i + 1));
}

int onset_index(const IonizationCurve& curve, double level, int persist) {
    for (int i = 0; i + persist < curve.size(); ++i) {
        bool ok = true;
        for (int k = 0; k <= persist; ++k)
            if (curve.p[static_cast<size_t>(i + k)] < level) {
                ok = false;
                break;
            }
        if (ok) return i;
    }
    return -1;
}

double crossing_field(const IonizationCurve& curve, double level) {
    for (int i = 0; i < curve.size(); ++i) {
        if (curve.p[static_cast<size_t>(i)] >= level) {
            if (i == 0) return curve.field(0);
            const double p0 = curve.p[static_cast<size_t>(i - 1)];
            const double p1 = curve.p[static_cast<size_t>(i)];
            const double frac = (p1 > p0) ? (level - p0) / (p1 - p0) : 1.0;
            return curve.field(i - 1) + frac * curve.step;
        }
    }
    return std::nan("");
}

void write_curve_csv(const IonizationCurve& curve, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw ConfigError("write_curve_csv: cannot open " + file.string());
    out << "# n0 = " << curve.meta.n0 << ", m0 = " << curve.meta.m0_tag
        << ", method = " << curve.meta.method
        << ", droop = " << (curve.meta.droop_corrected ? "on" : "off") << "\n";
    out << "field_V_per_cm,p_ion\n";
    for (int i = 0; i < curve.size(); ++i)
        out << format_double(curve.field(i)) << "," << format_double(curve.p[static_cast<size_t>(i)])
            << "\n";
    if (!out) throw ConfigError("write_curve_csv: write failed for " + file.string());
}

IonizationCurve read_curve_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("read_curve_csv: cannot open " + file.string());

    IonizationCurve curve;
    std::vector<double> fields;
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "field_V_per_cm,p_ion")
                throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                                  ": expected header 'field_V_per_cm,p_ion'");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        double f = 0.0, p = 0.0;
        char comma = '\0';
        if (!(row >> f >> comma >> p) || comma != ',')
            throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                              ": malformed CSV row");
        std::string rest;
        if (row >> rest)
            throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                              ": trailing characters in CSV row");
        fields.push_back(f);
        curve.p.push_back(p);
    }
    if (!header_seen || curve.p.empty())
        throw ConfigError(file.string() + ": no curve data");

    curve.field_lo = fields.front();
    curve.step = fields.size() > 1 ? fields[1] - fields[0] : 1.0;
    if (!(curve.step > 0.0))
        throw ConfigError(file.string() + ": field grid must be ascending");
    for (size_t i = 0; i < fields.size(); ++i) {
        if (std::abs(fields[i] - (curve.field_lo + curve.step * static_cast<double>(i))) >
            1e-6 * std::max(1.0, std::abs(fields[i])))
            throw ConfigError(file.string() + ": row " + std::to_string(i + 1) +
                              ": field grid not uniform");
    }
    curve.validate();
    return curve;
}

} // namespace rydion
