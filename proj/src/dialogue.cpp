// SPDX-License-Identifier: Apache-2.0
#include "latprof/dialogue.hpp"

#include "latprof/errors.hpp"
#include "latprof/io.hpp"
#include "latprof/prompts.hpp"
#include "latprof/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <unordered_map>

namespace latprof {

std::vector<ProfiledAgent> join_profiles(const std::vector<AgentSpec>& agents,
                                         const std::vector<ProfileRecord>& profiles) {
    std::unordered_map<std::string, const ProfileRecord*> by_id;
    for (const auto& p : profiles) by_id[p.agent_id] = &p;
    std::vector<ProfiledAgent> out;
    for (const auto& a : agents) {
        const auto it = by_id.find(a.agent_id);
        if (it == by_id.end() || !it->second->valid()) continue;
        out.push_back({a, it->second->profile()});
    }
    return out;
}

std::size_t PairingPlan::pair_count() const {
    std::size_t n = 0;
    for (const auto& [key, pairs] : cells) n += pairs.size();
    return n;
}

std::vector<PlannedPair> PairingPlan::flatten() const {
    std::vector<PlannedPair> out;
    out.reserve(pair_count());
    for (const auto& [key, pairs] : cells) out.insert(out.end(), pairs.begin(), pairs.end());
    return out;
}

namespace {

/// k distinct values from [0, n), ascending (Floyd's algorithm).
std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::uint64_t k, Rng& rng) {
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = n - k; j < n; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

/// Index in [0, s(s-1)/2) -> (a, b) with a < b, lexicographic order.
std::pair<std::size_t, std::size_t> unrank_combination(std::uint64_t idx, std::size_t s) {
    for (std::size_t a = 0; a + 1 < s; ++a) {
        const std::uint64_t count = s - 1 - a;
        if (idx < count) return {a, a + 1 + static_cast<std::size_t>(idx)};
        idx -= count;
    }
    throw Error("combination index out of range");
}

} // namespace

PairingPlan plan_pairs(const std::vector<ProfiledAgent>& agents, int pairs_per_cell, std::uint64_t seed) {
    if (pairs_per_cell < 1) throw ConfigError("pairs_per_cell must be >= 1");
    std::map<ProfileTuple, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < agents.size(); ++i) groups[agents[i].tuple()].push_back(i);

    std::vector<const std::pair<const ProfileTuple, std::vector<std::size_t>>*> tuples;
    for (const auto& g : groups) tuples.push_back(&g);

    PairingPlan plan;
    plan.seed = seed;
    for (std::size_t m = 0; m < tuples.size(); ++m) {
        for (std::size_t n = m; n < tuples.size(); ++n) {
            const auto& [um, gm] = *tuples[m];
            const auto& [un, gn] = *tuples[n];
            const PairKey key = canonical_pair_key(um, un);
            const std::uint64_t available =
                m == n ? gm.size() * (gm.size() - 1) / 2 : static_cast<std::uint64_t>(gm.size()) * gn.size();
            if (available == 0) {
                plan.skipped_cells.push_back(key.label());
                spdlog::debug("pairing cell {} skipped: no realizable agent pair", key.label());
                continue;
            }
            const std::string label = key.label();
            Rng rng(derive_seed(seed, "pair/" + label));
            const auto picks = sample_indices(available, std::min<std::uint64_t>(pairs_per_cell, available), rng);
            auto& cell = plan.cells[key];
            for (std::size_t j = 0; j < picks.size(); ++j) {
                std::size_t a, b;
                if (m == n) {
                    const auto [x, y] = unrank_combination(picks[j], gm.size());
                    a = gm[x];
                    b = gm[y];
                } else {
                    a = gm[picks[j] / gn.size()];
                    b = gn[picks[j] % gn.size()];
                }
                if (rng.coin()) std::swap(a, b);
                cell.push_back({agents[a].spec.agent_id, agents[b].spec.agent_id,
                                derive_seed(seed, "conv/" + label + "#" + std::to_string(j))});
            }
        }
    }
    return plan;
}

std::string opener_question(const Topic& topic) { return "Do you think that " + question_clause_of(topic) + "?"; }

bool ends_with_goodbye(std::string_view text) {
    std::string_view t = text;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
    return t.ends_with("Goodbye.");
}

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

Transcript run_conversation(const GridDefinition& grid, const AgentSpec& opener, const AgentSpec& responder,
                            const Topic& topic, Gateway& gateway, const ConversationOptions& options,
                            std::uint64_t seed) {
    if (opener.agent_id == responder.agent_id) throw Error("an agent cannot converse with itself");
    if (options.max_turns_per_agent < 1) throw ConfigError("max_turns_per_agent must be >= 1");

    Transcript t;
    t.conversation_id = opener.agent_id + "__" + responder.agent_id;
    t.pair = {opener.agent_id, responder.agent_id};
    t.topic_id = topic.id;
    t.seed = seed;
    t.metadata.agent_model = options.model_id;
    t.metadata.started_at = utc_now();

    const std::array<const AgentSpec*, 2> speakers{&opener, &responder};
    const std::array<std::string, 2> systems{build_mode_prompt(grid, opener, PromptMode::Conversation),
                                             build_mode_prompt(grid, responder, PromptMode::Conversation)};
    const auto cap = static_cast<std::size_t>(2 * options.max_turns_per_agent);

    t.turns.push_back({0, opener.agent_id, opener_question(topic), kNoScore});
    t.end_reason = EndReason::TurnCap;
    while (t.turns.size() < cap) {
        const std::size_t who = t.turns.size() % 2;
        ChatRequest request;
        request.system_prompt = systems[who];
        request.sampling = options.sampling;
        request.model_id = options.model_id;
        for (const auto& turn : t.turns)
            request.messages.push_back(
                {turn.speaker == speakers[who]->agent_id ? Role::Assistant : Role::User, turn.text});

        std::string reply;
        try {
            reply = gateway.chat(request, /*allow_empty=*/true);
        } catch (const Error& e) {
            t.failure = e.what();
            t.end_reason = EndReason::Failure;
            spdlog::warn("conversation {} failed at turn {}: {}", t.conversation_id, t.turns.size(), e.what());
            break;
        }
        const bool empty = trim(reply).empty();
        const bool previous_empty = trim(t.turns.back().text).empty();
        t.turns.push_back({static_cast<int>(t.turns.size()), speakers[who]->agent_id, std::move(reply), kNoScore});
        if (ends_with_goodbye(t.turns.back().text)) {
            t.end_reason = EndReason::Goodbye;
            break;
        }
        if (empty && previous_empty) {
            t.end_reason = EndReason::DoubleEmpty;
            break;
        }
    }
    t.metadata.finished_at = utc_now();
    return t;
}

std::string JudgeWindow::serialize() const {
    std::string out;
    for (const auto& s : statements) {
        if (trim(s.text).empty()) continue;
        if (!out.empty()) out += '\n';
        out += "Agent " + std::to_string(s.agent_label) + ": " + s.text;
    }
    return out.empty() ? std::string(" ") : out;
}

bool JudgeWindow::blank() const {
    return std::all_of(statements.begin(), statements.end(),
                       [](const JudgeStatement& s) { return trim(s.text).empty(); });
}

JudgeWindow build_judge_window(const Transcript& transcript, int upto_turn) {
    if (upto_turn < 0 || static_cast<std::size_t>(upto_turn) >= transcript.turns.size())
        throw Error("judge window turn out of range");
    JudgeWindow w;
    int taken_opener = 0;
    int taken_responder = 0;
    for (int k = upto_turn; k >= 0; --k) {
        const Turn& turn = transcript.turns[static_cast<std::size_t>(k)];
        const bool is_opener = turn.speaker == transcript.opener();
        int& taken = is_opener ? taken_opener : taken_responder;
        if (taken == 3) continue;
        ++taken;
        w.statements.push_back({turn.index, is_opener ? 1 : 2, turn.text});
        if (taken_opener == 3 && taken_responder == 3) break;
    }
    std::reverse(w.statements.begin(), w.statements.end());
    return w;
}

std::vector<CalibrationExemplar> load_calibration(const std::filesystem::path& path) {
    const auto j = read_json_file(path);
    std::vector<CalibrationExemplar> out;
    try {
        for (const auto& e : j) out.push_back({e.at("conversation").get<std::string>(), e.at("score").get<int>()});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("calibration file " + path.string() + ": " + e.what());
    }
    std::set<int> scores;
    for (const auto& e : out) scores.insert(e.score);
    if (out.size() != 5 || scores != std::set<int>{1, 2, 3, 4, 5})
        throw ConfigError("calibration file must hold five exemplars, one for each score 1-5");
    return out;
}

int judge_turn(const JudgeWindow& window, Gateway& judge, const JudgeOptions& options) {
    if (window.blank()) return kNoScore;
    ChatRequest request;
    request.system_prompt = options.system_prompt.empty() ? std::string(kJudgeSystemPrompt) : options.system_prompt;
    for (const auto& ex : options.calibration) {
        request.messages.push_back({Role::User, ex.conversation});
        request.messages.push_back({Role::Assistant, std::to_string(ex.score)});
    }
    request.messages.push_back({Role::User, window.serialize()});
    request.sampling = options.sampling;
    request.model_id = options.model_id;

    const auto parse = [](const std::string& reply) {
        if (trim(reply) == "-1") return kNoScore;
        return parse_scale_answer(reply, 1, 5);
    };
    try {
        std::string reply = judge.chat(request);
        try {
            return parse(reply);
        } catch (const ParseError&) {
        }
        request.messages.push_back({Role::Assistant, reply});
        request.messages.push_back({Role::User, "Respond with an integer number only."});
        return parse(judge.chat(request));
    } catch (const ParseError& e) {
        spdlog::info("judge reply unparseable, turn scored -1: {}", e.what());
    } catch (const ElicitationFailure& e) {
        spdlog::info("judge returned nothing, turn scored -1: {}", e.what());
    }
    return kNoScore;
}

Transcript judge_transcript(Transcript transcript, Gateway& judge, const JudgeOptions& options) {
    if (transcript.partial()) return transcript;
    for (std::size_t k = 0; k < transcript.turns.size(); ++k)
        transcript.turns[k].judge_score = judge_turn(build_judge_window(transcript, static_cast<int>(k)), judge, options);
    transcript.final_score = final_agreement(transcript.turns);
    transcript.judged = true;
    transcript.metadata.judge_model = options.model_id;
    transcript.metadata.calibrated = !options.calibration.empty();
    return transcript;
}

} // namespace latprof
