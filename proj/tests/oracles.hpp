#pragma once

// Brute-force reference computations used by the tests. These intentionally
// use raw (uncentered) moments in extended precision, a different summation
// route than the library, so agreement is meaningful.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline long double o_mean(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return s / static_cast<long double>(v.size());
}

inline long double o_mse(const std::vector<double>& p, const std::vector<double>& t) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double d = static_cast<long double>(p[i]) - t[i];
        s += d * d;
    }
    return s / static_cast<long double>(p.size());
}

struct RawMoments {
    long double ep, et, epp, ett, ept;
};

inline RawMoments o_raw(const std::vector<double>& p, const std::vector<double>& t) {
    RawMoments m{0.0L, 0.0L, 0.0L, 0.0L, 0.0L};
    const long double n = static_cast<long double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        m.ep += p[i];
        m.et += t[i];
        m.epp += static_cast<long double>(p[i]) * p[i];
        m.ett += static_cast<long double>(t[i]) * t[i];
        m.ept += static_cast<long double>(p[i]) * t[i];
    }
    m.ep /= n;
    m.et /= n;
    m.epp /= n;
    m.ett /= n;
    m.ept /= n;
    return m;
}

inline long double o_cor(const std::vector<double>& p, const std::vector<double>& t) {
    const RawMoments m = o_raw(p, t);
    const long double var_p = m.epp - m.ep * m.ep;
    const long double var_t = m.ett - m.et * m.et;
    const long double cov = m.ept - m.ep * m.et;
    return cov / (std::sqrt(var_p) * std::sqrt(var_t));
}

inline long double o_ccc(const std::vector<double>& p, const std::vector<double>& t) {
    const RawMoments m = o_raw(p, t);
    const long double var_p = m.epp - m.ep * m.ep;
    const long double var_t = m.ett - m.et * m.et;
    const long double cov = m.ept - m.ep * m.et;
    const long double dmu = m.ep - m.et;
    return 2.0L * cov / (var_p + var_t + dmu * dmu);
}

inline std::vector<long long> o_hist(const std::vector<double>& labels, int n_bins) {
    std::vector<long long> h(static_cast<std::size_t>(n_bins), 0);
    for (double x : labels) {
        int b = static_cast<int>(std::floor((x + 1.0) / 2.0 * n_bins));
        if (b < 0) b = 0;
        if (b >= n_bins) b = n_bins - 1;
        ++h[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace oracle
