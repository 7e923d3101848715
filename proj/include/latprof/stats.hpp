// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace latprof {

/// Probability mass over agreement scores 1..5.
struct ScoreDistribution {
    std::array<double, 5> probabilities{};
    std::size_t support_count = 0;

    /// Normalizes non-negative masses to sum 1. Throws Error on a negative mass or zero total.
    static ScoreDistribution from_masses(const std::array<double, 5>& masses, std::size_t support_count = 0);
    /// Empirical distribution of scores in [1,5]; -1 entries are ignored. Throws Error when none remain.
    static ScoreDistribution from_scores(const std::vector<int>& scores);

    double p(int score) const { return probabilities.at(static_cast<std::size_t>(score - 1)); }
};

/// p'(s) = p(6 - s).
ScoreDistribution invert_distribution(const ScoreDistribution& d);
double distribution_mean(const ScoreDistribution& d);

enum class ShiftMode { Linear, Sigmoid };
std::string_view to_string(ShiftMode m);

/// Mixing weight toward d4. Linear: gap/4. Sigmoid: logistic in gap centred at 2 with
/// steepness k, rescaled so w(0) = 0 and w(4) = 1.
double shift_weight(int gap, ShiftMode mode, double k = 2.0);

/// (1 - w) d0 + w d4.
ScoreDistribution interpolate_expected(const ScoreDistribution& d0, const ScoreDistribution& d4, int gap,
                                       ShiftMode mode, double k = 2.0);

struct BootstrapResult {
    double mean_of_means = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<double> resampled_means;
    std::uint64_t seed = 0;
};

/// reps resamples of `draw` values with replacement; 95% percentile interval.
BootstrapResult bootstrap_mean(const std::vector<double>& samples, std::uint64_t seed, int draw = 100,
                               int reps = 1000);

/// Linear-interpolated quantile of sorted data, q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct CorrelationResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    /// "t", "exact_permutation" or "sampled_permutation".
    std::string method;
};

double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided test of zero correlation. n >= 30: t approximation. n <= 10: all n! permutations.
/// Otherwise 10,000 seeded permutations. Throws DegenerateInput for a constant series and
/// Error for mismatched or too short inputs.
CorrelationResult pearson_test(const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed = 0);

enum class Alternative { TwoSided, ALess, AGreater };
std::string_view to_string(Alternative a);

struct MannWhitneyResult {
    /// #(a > b) + 0.5 #(a = b) over all cross pairs.
    double u = 0.0;
    double p = 1.0;
    bool exact = false;
};

/// Exact null distribution when |a| + |b| <= 12 and no value occurs in both samples;
/// normal approximation with tie and continuity correction otherwise.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                 Alternative alternative);

struct KsResult {
    double d = 0.0;
    double p = 1.0;
};

/// Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

/// D = sup |F_a - F_b|; p from the asymptotic distribution at sqrt(n_e) D, n_e = nm/(n+m).
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

struct BonferroniResult {
    double threshold = 0.0;
    std::vector<bool> reject;
    std::size_t rejections = 0;
};

/// Comparison i rejects iff p_i < alpha / n.
BonferroniResult bonferroni(const std::vector<double>& p_values, double alpha = 0.01);

} // namespace latprof
