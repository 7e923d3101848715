// SPDX-License-Identifier: Apache-2.0
#include "latprof/analysis.hpp"

#include "latprof/errors.hpp"
#include "latprof/rng.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

namespace latprof {

void Table::add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw Error("table row width does not match header");
    rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error("table has no column " + std::string(name));
}

const std::string& Table::cell(std::size_t row, std::string_view name) const { return rows.at(row).at(column(name)); }

std::string Table::to_tsv() const {
    std::string out;
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += '\t';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

Table Table::from_tsv(std::string_view text) {
    Table t;
    bool first = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t p = 0;
        while (true) {
            const std::size_t tab = line.find('\t', p);
            cells.emplace_back(line.substr(p, tab == std::string_view::npos ? std::string_view::npos : tab - p));
            if (tab == std::string_view::npos) break;
            p = tab + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.add(std::move(cells));
        }
    }
    return t;
}

std::string format_number(double v, int precision) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // no "-0.000000"
    return s;
}

std::vector<ScoredPair> join_scored_pairs(const std::vector<Transcript>& transcripts,
                                          const std::vector<ProfiledAgent>& agents, const GridDefinition& grid) {
    std::unordered_map<std::string, const ProfiledAgent*> by_id;
    for (const auto& a : agents) by_id[a.spec.agent_id] = &a;
    std::vector<ScoredPair> out;
    for (const auto& t : transcripts) {
        if (t.partial() || !t.judged) continue;
        if (!t.final_score) {
            spdlog::info("conversation {} excluded: every judge score is -1", t.conversation_id);
            continue;
        }
        const auto a = by_id.find(t.opener());
        const auto b = by_id.find(t.responder());
        if (a == by_id.end() || b == by_id.end()) continue;
        out.push_back({t.conversation_id, t.topic_id, grid.topic(t.topic_id).contentiousness, a->second->profile,
                       b->second->profile, a->second->spec.bias, b->second->spec.bias, *t.final_score});
    }
    return out;
}

std::vector<SuppressionRow> suppression_table(const ScoreDistribution& d0, const std::map<int, double>& observed_means,
                                              ShiftMode mode, double k) {
    const ScoreDistribution d4 = invert_distribution(d0);
    std::vector<SuppressionRow> out;
    for (const auto& [gap, observed] : observed_means) {
        const double expected = distribution_mean(interpolate_expected(d0, d4, gap, mode, k));
        out.push_back({gap, observed, expected, observed - expected, observed / expected});
    }
    return out;
}

namespace {

std::string pair_text(std::pair<int, int> p) { return std::to_string(p.first) + "-" + std::to_string(p.second); }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

struct Analyzer {
    const AnalysisOptions& options;

    BootstrapResult boot(const std::vector<double>& scores, const std::string& label) const {
        return bootstrap_mean(scores, derive_seed(options.seed, label), options.bootstrap_draw, options.bootstrap_reps);
    }

    std::vector<std::string> summary_cells(const std::vector<double>& scores, const std::string& label) const {
        const auto b = boot(scores, label);
        return {std::to_string(scores.size()), format_number(mean_of(scores)), format_number(b.ci_low),
                format_number(b.ci_high)};
    }
};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

bool both_implicit(const ScoredPair& d) {
    return d.bias_a.level() == BiasLevel::Implicit && d.bias_b.level() == BiasLevel::Implicit;
}

} // namespace

TableSet analyze(const std::vector<ScoredPair>& data, const AnalysisOptions& options) {
    const Analyzer an{options};
    TableSet out;

    std::map<int, std::vector<double>> by_gap;
    for (const auto& d : data) by_gap[d.gap()].push_back(d.score);

    Table gap_means{{"gap", "n", "mean", "boot_mean", "ci_low", "ci_high"}, {}};
    for (const auto& [gap, scores] : by_gap) {
        const auto b = an.boot(scores, "gap/" + std::to_string(gap));
        gap_means.add({std::to_string(gap), std::to_string(scores.size()), format_number(mean_of(scores)),
                       format_number(b.mean_of_means), format_number(b.ci_low), format_number(b.ci_high)});
    }
    out["gap_means"] = gap_means;

    Table distributions{{"subsample", "mode", "gap", "score", "observed", "expected"}, {}};
    Table suppression{{"subsample", "mode", "gap", "n", "observed_mean", "expected_mean", "observed_minus_expected",
                       "ratio"},
                      {}};
    const BiasSpec implicit = BiasSpec::implicit(Polarity::InFavor);
    const std::string implicit_label = "implicit B=" + std::to_string(implicit.main_text_number()) +
                                       " (appendix B=" + std::to_string(implicit.appendix_number()) + ")";
    for (const std::string& subsample : {std::string("all"), implicit_label}) {
        std::map<int, std::vector<int>> gaps;
        for (const auto& d : data)
            if (subsample == "all" || both_implicit(d)) gaps[d.gap()].push_back(d.score);
        const auto zero = gaps.find(0);
        if (zero == gaps.end()) continue;
        const auto d0 = ScoreDistribution::from_scores(zero->second);
        const auto d4 = invert_distribution(d0);
        std::map<int, double> observed_means;
        for (const auto& [gap, scores] : gaps)
            observed_means[gap] = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        for (const auto mode : {ShiftMode::Linear, ShiftMode::Sigmoid}) {
            const std::string m(to_string(mode));
            for (const auto& [gap, scores] : gaps) {
                const auto observed = ScoreDistribution::from_scores(scores);
                const auto expected = interpolate_expected(d0, d4, gap, mode, options.sigmoid_k);
                for (int s = 1; s <= 5; ++s)
                    distributions.add({subsample, m, std::to_string(gap), std::to_string(s),
                                       format_number(observed.p(s)), format_number(expected.p(s))});
            }
            for (const auto& row : suppression_table(d0, observed_means, mode, options.sigmoid_k))
                suppression.add({subsample, m, std::to_string(row.gap),
                                 std::to_string(gaps[row.gap].size()), format_number(row.observed_mean),
                                 format_number(row.expected_mean), format_number(row.difference),
                                 format_number(row.ratio)});
        }
    }
    out["distributions"] = distributions;
    out["suppression"] = suppression;

    Table anchors{{"anchor", "gap", "partner_preference", "n", "mean", "ci_low", "ci_high"}, {}};
    for (const int anchor : {1, 5})
        for (int gap = 0; gap <= 4; ++gap) {
            const int partner = anchor == 1 ? anchor + gap : anchor - gap;
            const std::pair<int, int> target = std::minmax(anchor, partner);
            std::vector<double> scores;
            for (const auto& d : data)
                if (d.preference_pair() == target) scores.push_back(d.score);
            if (scores.empty()) continue;
            anchors.add(concat({std::to_string(anchor), std::to_string(gap), std::to_string(partner)},
                               an.summary_cells(scores, "anchor/" + std::to_string(anchor) + "/" +
                                                            std::to_string(gap))));
        }
    out["anchors"] = anchors;

    std::map<std::pair<std::pair<int, int>, int>, std::vector<double>> by_content;
    for (const auto& d : data) by_content[{d.preference_pair(), d.contentiousness}].push_back(d.score);
    Table contentiousness{{"preference_pair", "contentiousness", "n", "mean", "ci_low", "ci_high"}, {}};
    for (const auto& [key, scores] : by_content)
        contentiousness.add(concat({pair_text(key.first), std::to_string(key.second)},
                                   an.summary_cells(scores, "content/" + pair_text(key.first) + "/" +
                                                                std::to_string(key.second))));
    out["contentiousness"] = contentiousness;

    std::map<std::pair<int, int>, std::vector<double>> by_open, by_open_15;
    for (const auto& d : data) {
        by_open[d.openness_pair()].push_back(d.score);
        if (d.preference_pair() == std::pair{1, 5}) by_open_15[d.openness_pair()].push_back(d.score);
    }
    Table openness{{"openness_pair", "n", "mean", "ci_low", "ci_high"}, {}};
    for (const auto& [op, scores] : by_open)
        openness.add(concat({pair_text(op)}, an.summary_cells(scores, "open/" + pair_text(op))));
    out["openness"] = openness;
    Table openness_subsample{{"openness_pair", "n", "mean"}, {}};
    for (const auto& [op, scores] : by_open_15)
        openness_subsample.add({pair_text(op), std::to_string(scores.size()), format_number(mean_of(scores))});
    out["openness_subsample"] = openness_subsample;

    Table tests{{"test_id", "name", "verdict", "statistics", "n_comparisons", "alpha", "adjusted_alpha", "flags",
                 "missing_cell", "decision_rule"},
                {}};
    Table comparisons{{"test_id", "comparison", "u_statistic", "p", "n_a", "n_b", "threshold", "reject"}, {}};
    for (const auto& o : run_all_tests(data, derive_seed(options.seed, "tests"))) {
        std::string stats;
        for (const auto& [k, v] : o.statistics) stats += (stats.empty() ? "" : ";") + k + "=" + format_number(v);
        std::string flags;
        for (const auto& f : o.flags) flags += (flags.empty() ? "" : ";") + f;
        tests.add({std::to_string(o.test_id), o.name, std::string(to_string(o.verdict)), stats.empty() ? "-" : stats,
                   std::to_string(o.n_comparisons), format_number(o.alpha), format_number(o.adjusted_alpha, 8),
                   flags.empty() ? "-" : flags, o.missing_cell.empty() ? "-" : o.missing_cell, o.decision_rule});
        for (const auto& c : o.comparisons)
            comparisons.add({std::to_string(o.test_id), c.label, format_number(c.statistic, 1), format_number(c.p, 8),
                             std::to_string(c.n_a), std::to_string(c.n_b), format_number(o.adjusted_alpha, 8),
                             c.p < o.adjusted_alpha ? "true" : "false"});
    }
    out["tests"] = tests;
    out["comparisons"] = comparisons;
    return out;
}

namespace {

const Table& need(const TableSet& analysis, const std::string& name) {
    const auto it = analysis.find(name);
    if (it == analysis.end()) throw StageError("missing analysis table: " + name);
    return it->second;
}

double number(const std::string& s) { return std::stod(s); }

} // namespace

TableSet build_report(const TableSet& analysis) {
    for (const auto& name : analysis_table_names()) need(analysis, name);
    TableSet out;

    out["fig_a_gap_agreement"] = need(analysis, "gap_means");
    out["fig_b_distributions"] = need(analysis, "distributions");
    out["fig_b_suppression"] = need(analysis, "suppression");

    const Table& anchors = need(analysis, "anchors");
    out["fig_c_anchor_agreement"] = anchors;
    std::map<int, std::map<int, double>> anchor_means;  // gap -> anchor -> mean
    for (std::size_t r = 0; r < anchors.rows.size(); ++r)
        anchor_means[std::stoi(anchors.cell(r, "gap"))][std::stoi(anchors.cell(r, "anchor"))] =
            number(anchors.cell(r, "mean"));
    Table deltas{{"gap", "anchor1_mean", "anchor5_mean", "anchor1_deficit"}, {}};
    for (const auto& [gap, means] : anchor_means)
        if (means.count(1) && means.count(5))
            deltas.add({std::to_string(gap), format_number(means.at(1)), format_number(means.at(5)),
                        format_number(means.at(5) - means.at(1))});
    out["fig_c_anchor_deltas"] = deltas;

    const Table& content = need(analysis, "contentiousness");
    std::map<std::string, std::pair<double, double>> band;
    for (std::size_t r = 0; r < content.rows.size(); ++r)
        if (content.cell(r, "contentiousness") == "1")
            band[content.cell(r, "preference_pair")] = {number(content.cell(r, "ci_low")),
                                                       number(content.cell(r, "ci_high"))};
    Table fig_d{{"preference_pair", "contentiousness", "n", "mean", "ci_low", "ci_high", "c1_band_low",
                 "c1_band_high", "mean_outside_c1_band"},
                {}};
    for (std::size_t r = 0; r < content.rows.size(); ++r) {
        auto row = content.rows[r];
        const auto it = band.find(content.cell(r, "preference_pair"));
        if (it == band.end()) {
            row.insert(row.end(), {"NA", "NA", "NA"});
        } else {
            const double m = number(content.cell(r, "mean"));
            row.insert(row.end(), {format_number(it->second.first), format_number(it->second.second),
                                   (m < it->second.first || m > it->second.second) ? "true" : "false"});
        }
        fig_d.add(std::move(row));
    }
    out["fig_d_contentiousness"] = fig_d;

    out["fig_e_openness"] = need(analysis, "openness");
    const Table& sub = need(analysis, "openness_subsample");
    std::optional<double> baseline;
    for (std::size_t r = 0; r < sub.rows.size(); ++r)
        if (sub.cell(r, "openness_pair") == "0-0") baseline = number(sub.cell(r, "mean"));
    Table fig_e_delta{{"openness_pair", "n", "mean", "delta_vs_0-0", "beats_baseline"}, {}};
    std::size_t beats = 0, compared = 0;
    if (baseline)
        for (std::size_t r = 0; r < sub.rows.size(); ++r) {
            if (sub.cell(r, "openness_pair") == "0-0") continue;
            const double delta = number(sub.cell(r, "mean")) - *baseline;
            ++compared;
            if (delta > 0) ++beats;
            fig_e_delta.add({sub.cell(r, "openness_pair"), sub.cell(r, "n"), sub.cell(r, "mean"), format_number(delta),
                             delta > 0 ? "true" : "false"});
        }
    out["fig_e_baseline_deltas"] = fig_e_delta;
    Table fig_e_summary{{"baseline", "baseline_mean", "pairings_above_baseline", "pairings_compared", "count"}, {}};
    if (baseline)
        fig_e_summary.add({"0-0", format_number(*baseline), std::to_string(beats), std::to_string(compared),
                           std::to_string(beats) + "/" + std::to_string(compared)});
    out["fig_e_summary"] = fig_e_summary;

    const Table& tests = need(analysis, "tests");
    Table verdicts{{"test_id", "name", "mark", "verdict", "statistics", "n_comparisons", "adjusted_alpha", "flags",
                    "missing_cell", "decision_rule"},
                   {}};
    for (std::size_t r = 0; r < tests.rows.size(); ++r) {
        const std::string& v = tests.cell(r, "verdict");
        verdicts.add({tests.cell(r, "test_id"), tests.cell(r, "name"), v == "pass" ? "✓" : v == "fail" ? "✗" : "?", v,
                      tests.cell(r, "statistics"), tests.cell(r, "n_comparisons"), tests.cell(r, "adjusted_alpha"),
                      tests.cell(r, "flags"), tests.cell(r, "missing_cell"), tests.cell(r, "decision_rule")});
    }
    out["fig_f_verdicts"] = verdicts;
    out["fig_f_comparisons_appendix"] = need(analysis, "comparisons");
    return out;
}

} // namespace latprof
