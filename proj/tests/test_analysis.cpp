// SPDX-License-Identifier: Apache-2.0
#include "latprof/analysis.hpp"
#include "latprof/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace latprof;

namespace {

ScoredPair pair_of(int pa, int pb, int score, int oa = 3, int ob = 3, int contentiousness = 1) {
    ScoredPair d;
    d.conversation_id = "c";
    d.topic_id = "t";
    d.contentiousness = contentiousness;
    d.a = LatentProfile(pa, oa);
    d.b = LatentProfile(pb, ob);
    d.score = score;
    return d;
}

void add_many(std::vector<ScoredPair>& data, int pa, int pb, int score, int count, int oa = 3, int ob = 3) {
    for (int i = 0; i < count; ++i) data.push_back(pair_of(pa, pb, score, oa, ob));
}

AnalysisOptions fast() {
    AnalysisOptions o;
    o.bootstrap_reps = 200;
    return o;
}

std::size_t row_where(const Table& t, const std::string& column, const std::string& value) {
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.cell(r, column) == value) return r;
    throw std::out_of_range(column + "=" + value);
}

} // namespace

TEST(Table, TsvRoundTrip) {
    Table t{{"a", "b"}, {}};
    t.add({"1", "x y"});
    t.add({"2", ""});
    const auto tsv = t.to_tsv();
    EXPECT_EQ(tsv, "a\tb\n1\tx y\n2\t\n");
    EXPECT_EQ(Table::from_tsv(tsv), t);
    EXPECT_THROW(t.add({"only one"}), Error);
    EXPECT_THROW(t.column("c"), Error);
}

TEST(FormatNumber, FixedAndNa) {
    EXPECT_EQ(format_number(0.33), "0.330000");
    EXPECT_EQ(format_number(-0.0), "0.000000");
    EXPECT_EQ(format_number(std::nan("")), "NA");
}

TEST(Suppression, LinearDifferencesAndRatios) {
    const auto d0 = ScoreDistribution::from_masses({0.000204, 0.00163, 0.205, 0.423, 0.371});
    const auto rows = suppression_table(d0, {{1, 4.13}, {2, 3.89}, {3, 3.69}, {4, 3.64}}, ShiftMode::Linear);
    ASSERT_EQ(rows.size(), 4u);
    const std::map<int, std::pair<double, double>> published{
        {4, {1.8, 2.0}}, {3, {1.27, 1.53}}, {2, {0.89, 1.30}}, {1, {0.55, 1.15}}};
    for (const auto& r : rows) {
        EXPECT_NEAR(r.difference, published.at(r.gap).first, 0.05) << r.gap;
        EXPECT_NEAR(r.ratio, published.at(r.gap).second, 0.05) << r.gap;
    }
}

TEST(Report, AnchorDeficitGrowsAsGapNarrows) {
    std::vector<ScoredPair> data;
    add_many(data, 2, 5, 4, 100);  // anchor 5, gap 3
    add_many(data, 1, 4, 4, 67);   // anchor 1, gap 3: mean 3.67
    add_many(data, 1, 4, 3, 33);
    add_many(data, 5, 5, 4, 100);  // anchor 5, gap 0
    add_many(data, 1, 1, 4, 38);   // anchor 1, gap 0: mean 3.38
    add_many(data, 1, 1, 3, 62);
    const auto report = build_report(analyze(data, fast()));
    const auto& deltas = report.at("fig_c_anchor_deltas");
    EXPECT_EQ(deltas.cell(row_where(deltas, "gap", "3"), "anchor1_deficit"), "0.330000");
    EXPECT_EQ(deltas.cell(row_where(deltas, "gap", "0"), "anchor1_deficit"), "0.620000");
}

TEST(Report, CountsPairingsAboveStubbornBaseline) {
    std::vector<ScoredPair> data;
    add_many(data, 1, 5, 3, 4, 0, 0);
    int made = 0;
    for (int lo = 0; lo <= 9 && made < 28; ++lo)
        for (int hi = lo; hi <= 9 && made < 28; ++hi) {
            if (lo == 0 && hi == 0) continue;
            add_many(data, 5, 1, made < 6 ? 4 : 2, 2, lo, hi);
            ++made;
        }
    const auto report = build_report(analyze(data, fast()));
    const auto& summary = report.at("fig_e_summary");
    ASSERT_EQ(summary.rows.size(), 1u);
    EXPECT_EQ(summary.cell(0, "count"), "6/28");
    EXPECT_EQ(report.at("fig_e_baseline_deltas").rows.size(), 28u);
}

TEST(Report, EmptyRunGivesHeaderOnlyTables) {
    const auto analysis = analyze({}, fast());
    for (const auto& name : analysis_table_names()) {
        ASSERT_TRUE(analysis.count(name)) << name;
        EXPECT_FALSE(analysis.at(name).header.empty()) << name;
    }
    for (const auto& name : {"gap_means", "distributions", "suppression", "anchors", "openness"})
        EXPECT_TRUE(analysis.at(name).rows.empty()) << name;
    const auto report = build_report(analysis);
    for (const auto& [name, table] : report) {
        if (name == "fig_f_verdicts") continue;
        EXPECT_TRUE(table.rows.empty()) << name;
        EXPECT_FALSE(table.header.empty()) << name;
    }
    // Verdict rows still list every test, each inconclusive.
    const auto& verdicts = report.at("fig_f_verdicts");
    ASSERT_EQ(verdicts.rows.size(), 6u);
    for (std::size_t r = 0; r < 6; ++r) EXPECT_EQ(verdicts.cell(r, "mark"), "?");
}

TEST(Report, MissingAnalysisTableIsNamed) {
    auto analysis = analyze({}, fast());
    analysis.erase("anchors");
    try {
        build_report(analysis);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_NE(std::string(e.what()).find("anchors"), std::string::npos);
    }
}

TEST(Report, VerdictTableCarriesComparisonAppendix) {
    std::vector<ScoredPair> data;
    add_many(data, 1, 1, 5, 10);
    for (int p : {2, 3, 4}) add_many(data, p, 5, 2, 10);
    const auto report = build_report(analyze(data, fast()));
    const auto& appendix = report.at("fig_f_comparisons_appendix");
    std::size_t t3 = 0;
    for (std::size_t r = 0; r < appendix.rows.size(); ++r)
        if (appendix.cell(r, "test_id") == "3") ++t3;
    EXPECT_EQ(t3, 3u);
    const auto& verdicts = report.at("fig_f_verdicts");
    EXPECT_EQ(verdicts.cell(row_where(verdicts, "test_id", "3"), "mark"), "✓");
}

TEST(Analysis, DeterministicForSeed) {
    std::vector<ScoredPair> data;
    for (int i = 0; i < 50; ++i) data.push_back(pair_of(1 + i % 5, 1 + (i * 3) % 5, 1 + (i * 7) % 5));
    EXPECT_EQ(analyze(data, fast()), analyze(data, fast()));
}

TEST(Analysis, SubsamplesCarryBothBiasNumberings) {
    std::vector<ScoredPair> data;
    for (int i = 0; i < 10; ++i) {
        auto d = pair_of(3, 3, 4);
        d.bias_a = d.bias_b = BiasSpec::implicit(Polarity::InFavor);
        data.push_back(d);
        data.push_back(pair_of(1, 5, 3));
    }
    const auto tables = analyze(data, fast());
    const auto& dist = tables.at("distributions");
    bool dist_seen = false;
    for (std::size_t r = 0; r < dist.rows.size(); ++r)
        dist_seen |= dist.cell(r, "subsample") == "implicit B=2 (appendix B=1)";
    EXPECT_TRUE(dist_seen);
}
