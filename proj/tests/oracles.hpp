// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations. Deliberately naive; they share no code with the library.
#pragma once

#include "latprof/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

/// Exact MWU p by enumerating every way to choose which pooled values form sample a.
inline double mwu_p(const std::vector<double>& a, const std::vector<double>& b, latprof::Alternative alt) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const int n = static_cast<int>(pooled.size());
    const int na = static_cast<int>(a.size());
    auto u_of = [&](std::uint32_t mask) {
        double u = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if ((mask >> i & 1u) && !(mask >> j & 1u) && pooled[i] > pooled[j]) u += 1;
        return u;
    };
    const double observed = u_of((1u << na) - 1u);
    double le = 0, ge = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != na) continue;
        const double u = u_of(mask);
        total += 1;
        if (u <= observed) le += 1;
        if (u >= observed) ge += 1;
    }
    le /= total;
    ge /= total;
    switch (alt) {
    case latprof::Alternative::ALess: return le;
    case latprof::Alternative::AGreater: return ge;
    case latprof::Alternative::TwoSided: return std::min(1.0, 2.0 * std::min(le, ge));
    }
    return 1.0;
}

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

/// Two-sided permutation p over all n! orderings of y.
inline double pearson_p(const std::vector<double>& x, const std::vector<double>& y) {
    const double observed = std::abs(pearson_r(x, y));
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    double hits = 0, total = 0;
    std::vector<double> permuted(y.size());
    do {
        for (std::size_t i = 0; i < idx.size(); ++i) permuted[i] = y[idx[i]];
        total += 1;
        if (std::abs(pearson_r(x, permuted)) >= observed - 1e-9) hits += 1;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return hits / total;
}

/// sup |F_a - F_b| evaluated at every pooled point.
inline double ks_d(const std::vector<double>& a, const std::vector<double>& b) {
    auto ecdf = [](const std::vector<double>& s, double v) {
        return static_cast<double>(std::count_if(s.begin(), s.end(), [v](double x) { return x <= v; })) /
               static_cast<double>(s.size());
    };
    double d = 0;
    for (const auto* s : {&a, &b})
        for (double v : *s) d = std::max(d, std::abs(ecdf(a, v) - ecdf(b, v)));
    return d;
}

} // namespace oracle
