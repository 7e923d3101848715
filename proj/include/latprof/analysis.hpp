// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/agent_factory.hpp"
#include "latprof/consistency_tests.hpp"
#include "latprof/dialogue.hpp"
#include "latprof/stats.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace latprof {

/// Tab-separated table with a header row. Cells must not contain tabs or newlines.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    std::size_t column(std::string_view name) const;
    const std::string& cell(std::size_t row, std::string_view name) const;
    std::string to_tsv() const;
    static Table from_tsv(std::string_view text);

    bool operator==(const Table&) const = default;
};

using TableSet = std::map<std::string, Table>;

/// Fixed-precision decimal, "NA" for NaN.
std::string format_number(double v, int precision = 6);

/// Judged, complete transcripts with a final score, joined with both agents' profiles and
/// their topic's contentiousness. Anything else is skipped.
std::vector<ScoredPair> join_scored_pairs(const std::vector<Transcript>& transcripts,
                                          const std::vector<ProfiledAgent>& agents, const GridDefinition& grid);

struct SuppressionRow {
    int gap = 0;
    double observed_mean = 0.0;
    double expected_mean = 0.0;
    /// observed - expected
    double difference = 0.0;
    /// observed / expected
    double ratio = 0.0;
};

/// Expected distribution per gap shifts from d0 to its reflection; observed means come from data.
std::vector<SuppressionRow> suppression_table(const ScoreDistribution& d0, const std::map<int, double>& observed_means,
                                              ShiftMode mode, double k = 2.0);

struct AnalysisOptions {
    std::uint64_t seed = 0;
    int bootstrap_draw = 100;
    int bootstrap_reps = 1000;
    double sigmoid_k = 2.0;
};

/// Tables: gap_means, distributions, suppression, anchors, contentiousness, openness,
/// openness_subsample, tests, comparisons. Empty data yields header-only tables.
TableSet analyze(const std::vector<ScoredPair>& data, const AnalysisOptions& options);

inline const std::vector<std::string>& analysis_table_names() {
    static const std::vector<std::string> names{"gap_means",   "distributions", "suppression",
                                                "anchors",     "contentiousness", "openness",
                                                "openness_subsample", "tests",  "comparisons"};
    return names;
}

/// Figure tables fig_a .. fig_f plus the comparison appendix, derived from analysis tables.
/// Throws StageError naming the first missing analysis table.
TableSet build_report(const TableSet& analysis);

} // namespace latprof
