#include "rydion/angular.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rydion {

namespace {

// log(k!) for k = 0..LOG_FACT_MAX, built once. Large enough for any
// coupling that appears with n <= a few hundred.
constexpr int LOG_FACT_MAX = 4096;

const double* log_fact_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(LOG_FACT_MAX + 1);
        for (int k = 0; k <= LOG_FACT_MAX; ++k)
            t[static_cast<size_t>(k)] = std::lgamma(static_cast<double>(k) + 1.0);
        return t;
    }();
    return table.data();
}

inline bool is_odd(int x) { return x & 1; }

} // namespace

double clebsch_gordan_2(int two_j1, int two_m1, int two_j2, int two_m2,
                        int two_J, int two_M) {
    if (two_M != two_m1 + two_m2) return 0.0;
    if (two_j1 < 0 || two_j2 < 0 || two_J < 0) return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 ||
        std::abs(two_M) > two_J)
        return 0.0;
    // triangle rule and integer perimeter
    if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2) return 0.0;
    if (is_odd(two_j1 + two_j2 + two_J)) return 0.0;
    if (is_odd(two_j1 + two_m1) || is_odd(two_j2 + two_m2) || is_odd(two_J + two_M))
        return 0.0;

    // Racah's closed form; all factorial arguments below are integers.
    const int a1 = (two_j1 + two_j2 - two_J) / 2;
    const int a2 = (two_j1 - two_j2 + two_J) / 2;
    const int a3 = (-two_j1 + two_j2 + two_J) / 2;
    const int a4 = (two_j1 + two_j2 + two_J) / 2 + 1;

    const int b1 = (two_J + two_M) / 2;
    const int b2 = (two_J - two_M) / 2;
    const int b3 = (two_j1 - two_m1) / 2;
    const int b4 = (two_j1 + two_m1) / 2;
    const int b5 = (two_j2 - two_m2) / 2;
    const int b6 = (two_j2 + two_m2) / 2;

    if (a4 > LOG_FACT_MAX)
        return 0.0; // beyond supported range; callers stay far below this
    const double* lf = log_fact_table();

    const double log_pre =
        0.5 * (std::log(two_J + 1.0) + lf[a1] + lf[a2] + lf[a3] - lf[a4] +
               lf[b1] + lf[b2] + lf[b3] + lf[b4] + lf[b5] + lf[b6]);

    const int k_lo = std::max({0, (two_j2 - two_J - two_m1) / 2,
                               (two_j1 - two_J + two_m2) / 2});
    const int k_hi = std::min({a1, b3, b6});

    long double sum = 0.0L;
    for (int k = k_lo; k <= k_hi; ++k) {
        const int c1 = a1 - k;
        const int c2 = b3 - k;
        const int c3 = b6 - k;
        const int c4 = (two_J - two_j2 + two_m1) / 2 + k;
        const int c5 = (two_J - two_j1 - two_m2) / 2 + k;
        const double log_term =
            log_pre - (lf[k] + lf[c1] + lf[c2] + lf[c3] + lf[c4] + lf[c5]);
        const long double term = std::exp(static_cast<long double>(log_term));
        sum += is_odd(k) ? -term : term;
    }
    return static_cast<double>(sum);
}

double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
    return clebsch_gordan_2(2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * J, 2 * M);
}

double z_angular_factor(int l_from, int l_to, int m) {
    if (std::abs(l_from - l_to) != 1) return 0.0;
    const int L = std::max(l_from, l_to);
    if (std::abs(m) >= L + 1) return 0.0;
    const double num = static_cast<double>(L) * L - static_cast<double>(m) * m;
    if (num <= 0.0) return 0.0;
    return std::sqrt(num / ((2.0 * L - 1.0) * (2.0 * L + 1.0)));
}

} // namespace rydion
