#include <doctest.h>

#include <cmath>
#include <random>

#include "rydion/average.hpp"
#include "rydion/errors.hpp"
#include "rydion/rng.hpp"

using namespace rydion;

namespace {

IonizationCurve make_curve(double lo, double step, std::vector<double> p) {
    IonizationCurve c;
    c.field_lo = lo;
    c.step = step;
    c.p = std::move(p);
    c.meta = {37, "0", "quantum", false};
    return c;
}

std::map<int, IonizationCurve> eight_copies(const IonizationCurve& c) {
    std::map<int, IonizationCurve> curves;
    for (int m0 : MWeights::m0_values) curves.emplace(m0, c);
    return curves;
}

} // namespace

TEST_CASE("m0 weights: paper values and exact normalization") {
    CHECK(MWeights::numerator(0) == 179);
    CHECK(MWeights::numerator(5) == 320);
    CHECK(MWeights::numerator(10) == 270);
    CHECK(MWeights::numerator(15) == 220);
    CHECK(MWeights::numerator(20) == 170);
    CHECK(MWeights::numerator(25) == 120);
    CHECK(MWeights::numerator(30) == 70);
    CHECK(MWeights::numerator(35) == 20);
    int total = 0;
    for (int m0 : MWeights::m0_values) total += MWeights::numerator(m0);
    CHECK(total == MWeights::denominator); // weights sum to exactly 1
    CHECK(MWeights::denominator == 37 * 37);
    CHECK_THROWS_AS(MWeights::numerator(7), ConfigError);
}

TEST_CASE("weights recomputed from the represented m bands") {
    const WeightReport report = validate_weights();
    CHECK(report.consistent);
    CHECK(report.total == 1369);
    // |m0| = 0 stands for m = -2..2: 37 + 2*36 + 2*35 = 179
    CHECK(report.recomputed_numerators[0] == 179);
    // |m0| = 35 stands for m = +-33..36: 2*(4+3+2+1) = 20
    CHECK(report.recomputed_numerators[7] == 20);
}

TEST_CASE("m_average: convexity and identity on equal curves") {
    const IonizationCurve base = make_curve(300.0, 1.0, {0.0, 0.1, 0.4, 0.9, 1.0});
    const IonizationCurve avg = m_average(eight_copies(base));
    REQUIRE(avg.size() == base.size());
    for (int i = 0; i < base.size(); ++i)
        CHECK(avg.p[static_cast<size_t>(i)] ==
              doctest::Approx(base.p[static_cast<size_t>(i)]).epsilon(1e-12));
    CHECK(avg.meta.m0_tag == "averaged");
}

TEST_CASE("m_average: missing curves and grid mismatches are rejected") {
    const IonizationCurve base = make_curve(300.0, 1.0, {0.0, 0.5, 1.0});
    auto curves = eight_copies(base);
    curves.erase(15);
    CHECK_THROWS_WITH_AS(m_average(curves), doctest::Contains("m0 = 15"), ConfigError);

    curves = eight_copies(base);
    curves.at(20).field_lo = 301.0;
    CHECK_THROWS_AS(m_average(curves), ConfigError);

    curves = eight_copies(base);
    curves.at(25).p.push_back(0.5);
    CHECK_THROWS_AS(m_average(curves), ConfigError);
}

TEST_CASE("m_average stays within the pointwise envelope of its inputs") {
    std::mt19937_64 rng(17);
    std::map<int, IonizationCurve> curves;
    for (int m0 : MWeights::m0_values) {
        std::vector<double> p(11);
        for (double& x : p) x = uniform01(rng);
        curves.emplace(m0, make_curve(300.0, 2.0, std::move(p)));
    }
    const IonizationCurve avg = m_average(curves);
    for (int i = 0; i < avg.size(); ++i) {
        double lo = 1.0, hi = 0.0;
        for (auto& [m0, c] : curves) {
            lo = std::min(lo, c.p[static_cast<size_t>(i)]);
            hi = std::max(hi, c.p[static_cast<size_t>(i)]);
        }
        CHECK(avg.p[static_cast<size_t>(i)] >= lo - 1e-14);
        CHECK(avg.p[static_cast<size_t>(i)] <= hi + 1e-14);
    }
}

TEST_CASE("droop: constant curves and the zero-droop identity") {
    const IonizationCurve constant = make_curve(300.0, 1.0, std::vector<double>(60, 0.37));
    const IonizationCurve smeared = droop_correct(constant);
    for (double p : smeared.p) CHECK(p == doctest::Approx(0.37).epsilon(1e-15));

    DroopProfile none;
    none.drop = 0.0;
    const IonizationCurve same = droop_correct(constant, none);
    REQUIRE(same.size() == constant.size());
    for (int i = 0; i < same.size(); ++i)
        CHECK(same.p[static_cast<size_t>(i)] == constant.p[static_cast<size_t>(i)]);
}

TEST_CASE("droop smears a step over ~7% of the field") {
    // step at 400 V/cm on a 350..460 grid
    std::vector<double> p;
    for (int f = 350; f <= 460; ++f) p.push_back(f >= 400 ? 1.0 : 0.0);
    const IonizationCurve step_curve = make_curve(350.0, 1.0, std::move(p));
    const IonizationCurve out = droop_correct(step_curve);

    DroopProfile profile;
    auto brute = [&](double e0) {
        // independent evaluation of the weighted sum on the step
        double acc = 0.0;
        for (int k = 0; k < profile.nodes; ++k) {
            const double u = (k + 0.5) / profile.nodes;
            const double local = (1.0 - profile.drop * u) * e0;
            if (std::lround(local - 350.0) + 350 >= 400) acc += 1.0 / profile.nodes;
        }
        return acc;
    };
    for (double e0 : {399.0, 405.0, 415.0, 425.0, 431.0, 440.0}) {
        const int idx = out.nearest_index(e0);
        CHECK(out.p[static_cast<size_t>(idx)] ==
              doctest::Approx(brute(out.field(idx))).epsilon(1e-12));
    }
    // rises over [400, 400/0.93 ~= 430]
    CHECK(out.p[static_cast<size_t>(out.nearest_index(399.0))] == 0.0);
    CHECK(out.p[static_cast<size_t>(out.nearest_index(405.0))] > 0.0);
    CHECK(out.p[static_cast<size_t>(out.nearest_index(405.0))] < 1.0);
    CHECK(out.p[static_cast<size_t>(out.nearest_index(431.0))] == 1.0);
}

TEST_CASE("droop trims uncovered center fields and reports empty coverage") {
    const IonizationCurve curve = make_curve(400.0, 1.0, std::vector<double>(31, 0.5));
    // lowest usable center: 0.93 * E0 >= 400 => E0 >= 430.1
    const IonizationCurve out = droop_correct(curve);
    CHECK(out.field_lo >= 430.0);
    CHECK(out.size() >= 1);

    const IonizationCurve tiny = make_curve(400.0, 1.0, std::vector<double>(5, 0.5));
    CHECK_THROWS_AS(droop_correct(tiny), ConfigError);
}

TEST_CASE("droop never expands the value range") {
    std::mt19937_64 rng(23);
    std::vector<double> p(80);
    for (double& x : p) x = uniform01(rng);
    const IonizationCurve curve = make_curve(300.0, 1.0, std::move(p));
    const IonizationCurve out = droop_correct(curve);
    const double lo = *std::min_element(curve.p.begin(), curve.p.end());
    const double hi = *std::max_element(curve.p.begin(), curve.p.end());
    for (double v : out.p) {
        CHECK(v >= lo - 1e-14);
        CHECK(v <= hi + 1e-14);
    }
}

TEST_CASE("droop correction commutes with m averaging") {
    std::mt19937_64 rng(29);
    std::map<int, IonizationCurve> curves;
    for (int m0 : MWeights::m0_values) {
        std::vector<double> p(90);
        for (double& x : p) x = uniform01(rng);
        curves.emplace(m0, make_curve(320.0, 1.0, std::move(p)));
    }
    const IonizationCurve droop_then_avg = [&] {
        std::map<int, IonizationCurve> d;
        for (auto& [m0, c] : curves) d.emplace(m0, droop_correct(c));
        return m_average(d);
    }();
    const IonizationCurve avg_then_droop = droop_correct(m_average(curves));
    REQUIRE(droop_then_avg.size() == avg_then_droop.size());
    for (int i = 0; i < droop_then_avg.size(); ++i)
        CHECK(droop_then_avg.p[static_cast<size_t>(i)] ==
              doctest::Approx(avg_then_droop.p[static_cast<size_t>(i)]).epsilon(1e-12));
}
