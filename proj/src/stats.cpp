// SPDX-License-Identifier: Apache-2.0
#include "latprof/stats.hpp"

#include "latprof/errors.hpp"
#include "latprof/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace latprof {

ScoreDistribution ScoreDistribution::from_masses(const std::array<double, 5>& masses, std::size_t support_count) {
    double total = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0)) throw Error("distribution mass must be non-negative");
        total += m;
    }
    if (total <= 0.0) throw Error("distribution has zero total mass");
    ScoreDistribution d;
    for (std::size_t i = 0; i < 5; ++i) d.probabilities[i] = masses[i] / total;
    d.support_count = support_count;
    return d;
}

ScoreDistribution ScoreDistribution::from_scores(const std::vector<int>& scores) {
    std::array<double, 5> counts{};
    std::size_t n = 0;
    for (int s : scores) {
        if (s == -1) continue;
        if (s < 1 || s > 5) throw Error("score out of range: " + std::to_string(s));
        counts[static_cast<std::size_t>(s - 1)] += 1.0;
        ++n;
    }
    return from_masses(counts, n);
}

ScoreDistribution invert_distribution(const ScoreDistribution& d) {
    ScoreDistribution out = d;
    std::reverse(out.probabilities.begin(), out.probabilities.end());
    return out;
}

double distribution_mean(const ScoreDistribution& d) {
    double m = 0.0;
    for (int s = 1; s <= 5; ++s) m += s * d.p(s);
    return m;
}

std::string_view to_string(ShiftMode m) { return m == ShiftMode::Linear ? "linear" : "sigmoid"; }

double shift_weight(int gap, ShiftMode mode, double k) {
    if (gap < 0 || gap > 4) throw Error("preference gap must be in [0,4]");
    if (mode == ShiftMode::Linear) return gap / 4.0;
    if (!(k > 0.0)) throw Error("sigmoid steepness must be positive");
    const auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    if (gap == 0) return 0.0;
    if (gap == 4) return 1.0;
    return (sigma(k * (gap - 2)) - sigma(-2 * k)) / (sigma(2 * k) - sigma(-2 * k));
}

ScoreDistribution interpolate_expected(const ScoreDistribution& d0, const ScoreDistribution& d4, int gap,
                                       ShiftMode mode, double k) {
    const double w = shift_weight(gap, mode, k);
    if (w == 0.0) return d0;
    if (w == 1.0) return d4;
    ScoreDistribution out;
    for (std::size_t i = 0; i < 5; ++i) out.probabilities[i] = (1.0 - w) * d0.probabilities[i] + w * d4.probabilities[i];
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error("quantile of empty data");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_mean(const std::vector<double>& samples, std::uint64_t seed, int draw, int reps) {
    if (samples.empty()) throw Error("bootstrap over an empty sample");
    if (draw < 1 || reps < 1) throw Error("bootstrap draw and reps must be positive");
    Rng rng(seed);
    BootstrapResult out;
    out.seed = seed;
    out.resampled_means.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        double sum = 0.0;
        for (int i = 0; i < draw; ++i) sum += samples[rng.below(samples.size())];
        out.resampled_means.push_back(sum / draw);
    }
    out.mean_of_means = std::accumulate(out.resampled_means.begin(), out.resampled_means.end(), 0.0) / reps;
    std::vector<double> sorted = out.resampled_means;
    std::sort(sorted.begin(), sorted.end());
    out.ci_low = quantile_sorted(sorted, 0.025);
    out.ci_high = quantile_sorted(sorted, 0.975);
    return out;
}

// ---------------------------------------------------------------------------
// Pearson

namespace {

struct Centered {
    std::vector<double> x;
    std::vector<double> y;
    double denom = 0.0;
};

Centered center(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("pearson: series lengths differ");
    if (x.size() < 3) throw Error("pearson: need at least 3 observations");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    Centered c;
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        c.x.push_back(x[i] - mx);
        c.y.push_back(y[i] - my);
        sxx += c.x.back() * c.x.back();
        syy += c.y.back() * c.y.back();
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: constant series");
    c.denom = std::sqrt(sxx * syy);
    return c;
}

double correlation_of(const Centered& c, const std::vector<std::size_t>& perm) {
    double sxy = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) sxy += c.x[i] * c.y[perm[i]];
    return std::clamp(sxy / c.denom, -1.0, 1.0);
}

} // namespace

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const Centered c = center(x, y);
    std::vector<std::size_t> id(x.size());
    std::iota(id.begin(), id.end(), 0);
    return correlation_of(c, id);
}

CorrelationResult pearson_test(const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed) {
    const Centered c = center(x, y);
    const std::size_t n = x.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CorrelationResult out;
    out.n = n;
    out.r = correlation_of(c, perm);
    const double cutoff = std::abs(out.r) - 1e-12;

    if (n >= 30) {
        out.method = "t";
        if (std::abs(out.r) >= 1.0) {
            out.p = 0.0;
            return out;
        }
        const double df = static_cast<double>(n - 2);
        const double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
        boost::math::students_t dist(df);
        out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
        return out;
    }
    if (n <= 10) {
        out.method = "exact_permutation";
        std::uint64_t hits = 0, total = 0;
        do {
            ++total;
            if (std::abs(correlation_of(c, perm)) >= cutoff) ++hits;
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.p = static_cast<double>(hits) / static_cast<double>(total);
        return out;
    }
    out.method = "sampled_permutation";
    constexpr int kPermutations = 10000;
    Rng rng(seed);
    int hits = 0;
    for (int k = 0; k < kPermutations; ++k) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        if (std::abs(correlation_of(c, perm)) >= cutoff) ++hits;
    }
    out.p = (hits + 1.0) / (kPermutations + 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

std::string_view to_string(Alternative a) {
    switch (a) {
    case Alternative::TwoSided: return "two_sided";
    case Alternative::ALess: return "a_less";
    case Alternative::AGreater: return "a_greater";
    }
    return "?";
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Number of arrangements of na a's and nb b's (no ties) giving each U_a = 0..na*nb.
std::vector<double> u_counts(int na, int nb) {
    // f[i][j] is the count vector for i a's and j b's; the largest element is either an a
    // (beating all j b's) or a b.
    std::vector<std::vector<std::vector<double>>> f(
        static_cast<std::size_t>(na + 1), std::vector<std::vector<double>>(static_cast<std::size_t>(nb + 1)));
    for (int i = 0; i <= na; ++i)
        for (int j = 0; j <= nb; ++j) {
            auto& cur = f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            cur.assign(static_cast<std::size_t>(i * j + 1), 0.0);
            if (i == 0 || j == 0) {
                cur[0] = 1.0;
                continue;
            }
            const auto& with_a = f[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
            const auto& with_b = f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
            for (std::size_t u = 0; u < with_a.size(); ++u) cur[u + static_cast<std::size_t>(j)] += with_a[u];
            for (std::size_t u = 0; u < with_b.size(); ++u) cur[u] += with_b[u];
        }
    return f[static_cast<std::size_t>(na)][static_cast<std::size_t>(nb)];
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b, Alternative alternative) {
    if (a.empty() || b.empty()) throw Error("mann_whitney_u: both samples must be non-empty");
    MannWhitneyResult out;
    bool cross_tie = false;
    for (double x : a)
        for (double y : b) {
            if (x > y) out.u += 1.0;
            else if (x == y) {
                out.u += 0.5;
                cross_tie = true;
            }
        }
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;

    if (n <= 12 && !cross_tie) {
        out.exact = true;
        const auto counts = u_counts(static_cast<int>(na), static_cast<int>(nb));
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto u = static_cast<std::size_t>(out.u);
        double le = 0.0, ge = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= u) le += counts[k];
            if (k >= u) ge += counts[k];
        }
        le /= total;
        ge /= total;
        switch (alternative) {
        case Alternative::ALess: out.p = le; break;
        case Alternative::AGreater: out.p = ge; break;
        case Alternative::TwoSided: out.p = std::min(1.0, 2.0 * std::min(le, ge)); break;
        }
        return out;
    }

    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double dn = static_cast<double>(n);
    const double mu = static_cast<double>(na * nb) / 2.0;
    const double var = static_cast<double>(na * nb) / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (var <= 0.0) {
        out.p = 1.0;
        return out;
    }
    const double sigma = std::sqrt(var);
    switch (alternative) {
    case Alternative::AGreater: out.p = normal_sf((out.u - mu - 0.5) / sigma); break;
    case Alternative::ALess: out.p = normal_sf((mu - out.u - 0.5) / sigma); break;
    case Alternative::TwoSided:
        out.p = std::min(1.0, 2.0 * normal_sf(std::max(0.0, std::abs(out.u - mu) - 0.5) / sigma));
        break;
    }
    out.p = std::clamp(out.p, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (lambda < 1.18) {
        // Alternate series for the CDF converges fast for small lambda.
        double cdf = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            cdf += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
        }
        cdf *= std::sqrt(2.0 * pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("ks_two_sample: both samples must be non-empty");
    std::vector<double> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    KsResult out;
    std::size_t i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        out.d = std::max(out.d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    out.p = kolmogorov_q(std::sqrt(ne) * out.d);
    return out;
}

BonferroniResult bonferroni(const std::vector<double>& p_values, double alpha) {
    BonferroniResult out;
    if (p_values.empty()) return out;
    out.threshold = alpha / static_cast<double>(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("bonferroni: p-value outside [0,1]");
        out.reject.push_back(p < out.threshold);
        if (out.reject.back()) ++out.rejections;
    }
    return out;
}

} // namespace latprof
