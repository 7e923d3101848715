// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero if any fails.
#include "latprof/agent_factory.hpp"
#include "latprof/analysis.hpp"
#include "latprof/dialogue.hpp"
#include "latprof/io.hpp"
#include "latprof/pipeline.hpp"
#include "latprof/rng.hpp"
#include "latprof/scripted_backend.hpp"
#include "latprof/stats.hpp"
#include "latprof/validity.hpp"
#include "oracles.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using namespace latprof;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

constexpr std::array<double, 5> kGap0{0.000204, 0.00163, 0.205, 0.423, 0.371};
constexpr std::array<double, 5> kGap4{0.371, 0.423, 0.205, 0.00163, 0.000204};

ScoreDistribution raw(const std::array<double, 5>& p) {
    ScoreDistribution d;
    d.probabilities = p;
    return d;
}

void criterion_1(Check& c) {
    const auto inv = invert_distribution(raw(kGap0));
    bool exact = true;
    for (int s = 1; s <= 5; ++s) exact &= inv.p(s) == kGap4[static_cast<std::size_t>(s - 1)];
    const double mean = distribution_mean(inv);
    c.detail << "inverted column exact=" << (exact ? "yes" : "no") << ", mean=" << mean;
    c.require(exact, "inverted masses differ from the expected column");
    c.require(std::abs(mean - 1.8) <= 0.05, "mean outside 1.8 +/- 0.05");
}

void criterion_2(Check& c) {
    const auto d0 = raw(kGap0);
    const std::map<int, double> observed{{4, 3.64}, {3, 3.69}, {2, 3.89}, {1, 4.13}};
    const std::map<int, double> published{{4, 1.8}, {3, 1.27}, {2, 0.89}, {1, 0.55}};
    for (const auto& row : suppression_table(d0, observed, ShiftMode::Linear)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " gap%d=%.3f", row.gap, row.difference);
        c.detail << buf;
        c.require(std::abs(row.difference - published.at(row.gap)) <= 0.05, "gap " + std::to_string(row.gap));
    }
}

std::vector<double> random_values(Rng& rng, std::size_t n, int lo, int hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    return v;
}

void criterion_3(Check& c) {
    Rng rng(derive_seed(3, "acceptance/stats"));
    int mwu_mismatch = 0;
    for (int k = 0; k < 500; ++k) {
        const std::size_t na = 1 + rng.below(9);
        const std::size_t nb = 1 + rng.below(10 - na);
        std::vector<double> pool(na + nb);
        std::iota(pool.begin(), pool.end(), 1.0);
        for (std::size_t i = pool.size() - 1; i > 0; --i) std::swap(pool[i], pool[rng.below(i + 1)]);
        const std::vector<double> a(pool.begin(), pool.begin() + static_cast<long>(na));
        const std::vector<double> b(pool.begin() + static_cast<long>(na), pool.end());
        const auto alt = static_cast<Alternative>(rng.below(3));
        const auto res = mann_whitney_u(a, b, alt);
        if (!res.exact || std::abs(res.p - oracle::mwu_p(a, b, alt)) > 1e-12) ++mwu_mismatch;
    }
    int pearson_mismatch = 0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 3 + rng.below(5);
        std::vector<double> x, y;
        do {
            x = random_values(rng, n, 1, 9);
            y = random_values(rng, n, 1, 9);
        } while (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                 std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }));
        if (std::abs(pearson_test(x, y).p - oracle::pearson_p(x, y)) > 1e-12) ++pearson_mismatch;
    }
    int ks_mismatch = 0;
    for (int k = 0; k < 200; ++k) {
        const auto a = random_values(rng, 1 + rng.below(50), 1, 5 + static_cast<int>(rng.below(20)));
        const auto b = random_values(rng, 1 + rng.below(50), 1, 5 + static_cast<int>(rng.below(20)));
        if (std::abs(ks_two_sample(a, b).d - oracle::ks_d(a, b)) > 1e-12) ++ks_mismatch;
    }
    c.detail << "mismatches: mwu " << mwu_mismatch << "/500, pearson " << pearson_mismatch << "/100, ks "
             << ks_mismatch << "/200";
    c.require(mwu_mismatch == 0 && pearson_mismatch == 0 && ks_mismatch == 0, "oracle mismatch");
}

void criterion_4(Check& c) {
    constexpr int kRuns = 200;
    int covered = 0;
    double half_width_sum = 0;
    for (int run = 0; run < kRuns; ++run) {
        Rng rng(derive_seed(4, "acceptance/population/" + std::to_string(run)));
        const auto sample = random_values(rng, 100, 1, 5);
        const auto b = bootstrap_mean(sample, derive_seed(4, "acceptance/bootstrap/" + std::to_string(run)));
        half_width_sum += (b.ci_high - b.ci_low) / 2;
        if (b.ci_low <= 3.0 && 3.0 <= b.ci_high) ++covered;
    }
    const double half_width = half_width_sum / kRuns;
    const double coverage = static_cast<double>(covered) / kRuns;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean half-width=%.4f, coverage=%d/%d (%.1f%%)", half_width, covered, kRuns,
                  100 * coverage);
    c.detail << buf;
    c.require(std::abs(half_width - 0.277) <= 0.05, "half-width");
    c.require(coverage >= 0.93 && coverage <= 0.97, "coverage outside 93-97%");
}

std::map<int, std::string> verdicts_of(const fs::path& out) {
    const auto t = Table::from_tsv(read_text_file(out / "analysis" / "tests.tsv"));
    std::map<int, std::string> v;
    for (std::size_t r = 0; r < t.rows.size(); ++r) v[std::stoi(t.cell(r, "test_id"))] = t.cell(r, "verdict");
    return v;
}

void criterion_5(Check& c) {
    const fs::path config = fs::path(LATPROF_TEST_DATA) / "planted_stance.json";
    const fs::path base = fs::temp_directory_path() / "latprof_acceptance";
    fs::remove_all(base);

    auto planted = load_run_config(config);
    planted.out = base / "planted";
    Pipeline(planted).run_all();
    const auto v = verdicts_of(planted.out);

    auto sycophantic = load_run_config(config);
    sycophantic.out = base / "sycophantic";
    sycophantic.scripted.defaults.conversation = ConversationPolicy::AlwaysAgree;
    Pipeline(sycophantic).run_all();
    const auto vs = verdicts_of(sycophantic.out);
    int min_score = 5;
    for (const auto& t : read_jsonl<Transcript>(sycophantic.out / "kept_transcripts.jsonl"))
        if (t.final_score) min_score = std::min(min_score, *t.final_score);

    c.detail << "planted T1=" << v.at(1) << " T5=" << v.at(5) << "; sycophantic T2=" << vs.at(2)
             << " (min score " << min_score << ")";
    c.require(v.at(1) == "pass", "planted T1");
    c.require(v.at(5) == "pass", "planted T5");
    c.require(min_score >= 3, "sycophantic scores below 3");
    c.require(vs.at(2) == "fail", "sycophantic T2");
}

void criterion_6(Check& c) {
    const auto grid = GridDefinition::defaults();
    bool all_4800 = true;
    for (const auto& topic : grid.topics) {
        const auto agents = enumerate_agents(grid, topic);
        std::set<std::pair<DemographicProfile, BiasSpec>> distinct;
        for (const auto& a : agents) distinct.emplace(a.demographics, a.bias);
        all_4800 &= agents.size() == 4800 && distinct.size() == 4800;
    }
    const std::string persona =
        "You are a man in their twenties from an urban part of the Midwestern United States. Your highest level of "
        "educational attainment is Some High School.";
    const std::array<std::pair<BiasSpec, std::string>, 3> pinned{{
        {BiasSpec::none(), persona},
        {BiasSpec::implicit(Polarity::InFavor), "You are a liberal Democrat."},
        {BiasSpec::explicit_stance(Polarity::Against),
         "You do not like taxes of any kind and think they harm the community."},
    }};
    int found = 0;
    for (const auto& [bias, text] : pinned) {
        const AgentSpec spec{"taxes-pinned",
                             {Region::Midwestern, AgeGroup::Twenties, Gender::Man, Urbanicity::Urban,
                              Education::SomeHighSchool},
                             bias,
                             "taxes"};
        for (const auto mode : {PromptMode::Preference, PromptMode::Openness, PromptMode::Conversation})
            if (build_mode_prompt(grid, spec, mode).find(text) == std::string::npos) goto next;
        ++found;
    next:;
    }
    c.detail << "topics=" << grid.topics.size() << " with 4800 distinct agents each=" << (all_4800 ? "yes" : "no")
             << ", pinned strings found=" << found << "/3";
    c.require(all_4800, "agent count");
    c.require(found == 3, "pinned prompt strings");
}

void criterion_7(Check& c) {
    const auto grid = GridDefinition::defaults();
    const Topic& topic = grid.topic("taxes");
    Rng rng(derive_seed(7, "acceptance/conversations"));
    const std::array<ConversationPolicy, 5> policies{ConversationPolicy::AlwaysAgree, ConversationPolicy::AlwaysDisagree,
                                                     ConversationPolicy::Echo, ConversationPolicy::GoodbyeAfterK,
                                                     ConversationPolicy::Stance};
    std::size_t conversations = 0, over_cap = 0, goodbye_not_last = 0, goodbye_ended = 0;
    for (int k = 0; k < 200; ++k) {
        ScriptedConfig cfg;
        cfg.defaults.conversation = policies[rng.below(policies.size())];
        cfg.defaults.goodbye_k = 1 + static_cast<int>(rng.below(6));
        cfg.defaults.preference_answer = 1 + static_cast<int>(rng.below(5));
        ScriptedPatch patch;
        patch.conversation = policies[rng.below(policies.size())];
        patch.goodbye_k = 1 + static_cast<int>(rng.below(6));
        patch.preference_answer = 1 + static_cast<int>(rng.below(5));
        cfg.rules.push_back({"Southern", patch});
        Gateway g(std::make_shared<ScriptedBackend>(cfg));
        const AgentSpec a{"a", {Region::Eastern, AgeGroup::Forties, Gender::Man, Urbanicity::Rural, Education::College},
                          {}, "taxes"};
        AgentSpec b = a;
        b.agent_id = "b";
        b.demographics.region = Region::Southern;
        const auto t = run_conversation(grid, a, b, topic, g, {5, "scripted", {0.7, 256}});
        ++conversations;
        if (t.turns.size() > 10) ++over_cap;
        for (std::size_t i = 0; i < t.turns.size(); ++i)
            if (ends_with_goodbye(t.turns[i].text) && i + 1 != t.turns.size()) ++goodbye_not_last;
        if (t.end_reason == EndReason::Goodbye) ++goodbye_ended;
    }

    // Blank windows score -1 and never reach the judge.
    class CountingJudge : public ChatBackend {
    public:
        std::string complete(const ChatRequest&) override {
            ++calls;
            return "5";
        }
        std::string describe() const override { return "counting"; }
        int calls = 0;
    };
    auto judge_backend = std::make_shared<CountingJudge>();
    Gateway judge(judge_backend);
    Transcript blank;
    blank.conversation_id = "a__b";
    blank.pair = {"a", "b"};
    for (int i = 0; i < 4; ++i) blank.turns.push_back({i, i % 2 ? "b" : "a", i % 2 ? "" : "  "});
    int blank_scores = 0;
    for (int k = 0; k < 4; ++k) blank_scores += judge_turn(build_judge_window(blank, k), judge, {}) == kNoScore;
    const bool blank_ok = blank_scores == 4 && judge_backend->calls == 0 &&
                          scripted_judge_score(build_judge_window(blank, 3).serialize()) == kNoScore;

    // final_agreement against a reverse scan.
    int agreement_mismatch = 0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<Turn> turns(rng.below(11));
        for (auto& t : turns) t.judge_score = rng.below(3) == 0 ? kNoScore : 1 + static_cast<int>(rng.below(5));
        std::optional<int> expected;
        for (auto it = turns.rbegin(); it != turns.rend(); ++it)
            if (it->judge_score != kNoScore) {
                expected = it->judge_score;
                break;
            }
        if (final_agreement(turns) != expected) ++agreement_mismatch;
    }

    c.detail << conversations << " conversations, over cap " << over_cap << ", goodbye not last " << goodbye_not_last
             << " (" << goodbye_ended << " ended by goodbye), blank windows -1 " << blank_scores << "/4 with "
             << judge_backend->calls << " judge calls, final_agreement mismatches " << agreement_mismatch << "/1000";
    c.require(over_cap == 0, "turn cap");
    c.require(goodbye_not_last == 0 && goodbye_ended > 0, "goodbye termination");
    c.require(blank_ok, "blank window");
    c.require(agreement_mismatch == 0, "final_agreement");
}

void criterion_8(Check& c) {
    const double identical = self_bleu({"taxes help to meet the needs of society", "taxes help to meet the needs of society"});
    const double disjoint = self_bleu({"a b c d e", "v w x y z"});
    const double fixture = self_bleu({"a b c d e", "a b c d e", "v w x y z"});
    const double hand = (1.0 + 1.0 + 1e-9) / 3.0;
    const std::string loop_line =
        "I hear you, honey. Around here, we pay our taxes and don't see much improvement. Roads get worse, schools "
        "don't get better, and services are often cut. It just feels like a waste.";
    const double loop = self_bleu(std::vector<std::string>(4, loop_line));

    Rng rng(derive_seed(8, "acceptance/diversity"));
    std::vector<DiversityScore> scores;
    std::vector<Transcript> transcripts;
    std::set<AgentId> above;
    for (int i = 0; i < 60; ++i) {
        const AgentId id = "agent" + std::to_string(i);
        const double s = i == 0 ? kDefaultDiversityThreshold : i == 1 ? 0.20 : rng.unit() * 0.4;
        scores.push_back({id, s, 1});
        if (s > kDefaultDiversityThreshold) above.insert(id);
    }
    for (int i = 0; i < 60; i += 2) {
        Transcript t;
        t.conversation_id = "c" + std::to_string(i);
        t.pair = {"agent" + std::to_string(i), "agent" + std::to_string(i + 1)};
        transcripts.push_back(t);
    }
    const auto f = filter_by_diversity(transcripts, scores);
    const std::set<AgentId> removed(f.removed_agents.begin(), f.removed_agents.end());
    bool conversations_ok = f.kept.size() + f.removed.size() == transcripts.size();
    for (const auto& t : f.removed) conversations_ok &= above.count(t.pair.first) || above.count(t.pair.second);
    for (const auto& t : f.kept) conversations_ok &= !above.count(t.pair.first) && !above.count(t.pair.second);

    char buf[160];
    std::snprintf(buf, sizeof buf, "identical=%.6f disjoint=%.3g fixture-hand=%.3g loop=%.4f removed=%zu/%zu agents",
                  identical, disjoint, fixture - hand, loop, removed.size(), scores.size());
    c.detail << buf;
    c.require(identical == 1.0, "identical texts");
    c.require(disjoint <= 1e-6, "disjoint texts");
    c.require(std::abs(fixture - hand) <= 1e-9, "three-text fixture");
    c.require(loop > 0.9, "degenerate loop");
    c.require(removed == above && conversations_ok && !removed.count("agent0") && removed.count("agent1"),
              "threshold filtering");
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<std::tuple<int, std::string, double, std::function<void(Check&)>>> criteria{
        {1, "score-distribution inversion and its mean", 1.0, criterion_1},
        {2, "suppression differences under linear shift", 1.0, criterion_2},
        {3, "MWU, Pearson and KS against brute-force oracles", 120.0, criterion_3},
        {4, "bootstrap half-width and coverage", 60.0, criterion_4},
        {5, "planted scripted pipeline verdicts", 120.0, criterion_5},
        {6, "agent grid size and pinned prompt strings", 5.0, criterion_6},
        {7, "conversation mechanics", 60.0, criterion_7},
        {8, "Self-BLEU diversity metric and filtering", 10.0, criterion_8},
    };
    int failures = 0;
    for (const auto& [id, name, budget, fn] : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << " [exception: " << e.what() << "]";
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > budget) {
            c.ok = false;
            c.detail << " [over time budget " << budget << " s]";
        }
        std::printf("%s criterion %d: %s: %s (%.3f s)\n", c.ok ? "PASS" : "FAIL", id, name.c_str(),
                    c.detail.str().c_str(), seconds);
        failures += c.ok ? 0 : 1;
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
