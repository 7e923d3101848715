// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/agent_factory.hpp"
#include "latprof/elicitation.hpp"
#include "latprof/gateway.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace latprof {

/// An agent that passed elicitation, with the tuple it realizes.
struct ProfiledAgent {
    AgentSpec spec;
    LatentProfile profile;

    ProfileTuple tuple() const { return ProfileTuple::of(profile, spec.bias); }
};

/// Joins agents with their valid profile records; invalid or missing profiles are dropped.
std::vector<ProfiledAgent> join_profiles(const std::vector<AgentSpec>& agents,
                                         const std::vector<ProfileRecord>& profiles);

struct PlannedPair {
    AgentId opener;
    AgentId responder;
    std::uint64_t seed = 0;

    bool operator==(const PlannedPair&) const = default;
};

struct PairingPlan {
    std::map<PairKey, std::vector<PlannedPair>> cells;
    std::uint64_t seed = 0;
    /// Cells with no realizable agent pair, by label.
    std::vector<std::string> skipped_cells;

    std::size_t pair_count() const;
    /// All pairs in cell order.
    std::vector<PlannedPair> flatten() const;
};

/// For each unordered tuple pair (U_m, U_n) samples up to pairs_per_cell distinct agent
/// pairs uniformly without replacement, one side realizing U_m and the other U_n, never an
/// agent with itself. The opener is a seeded coin flip. Deterministic given the seed.
PairingPlan plan_pairs(const std::vector<ProfiledAgent>& agents, int pairs_per_cell, std::uint64_t seed);

struct ConversationOptions {
    int max_turns_per_agent = 5;
    std::string model_id;
    Sampling sampling{0.7, 256};
};

/// "Do you think that taxes help to meet the needs of society?"
std::string opener_question(const Topic& topic);

/// Trailing-whitespace-trimmed text ends with "Goodbye." (case-sensitive).
bool ends_with_goodbye(std::string_view text);

/// Runs one bounded conversation. The opener's first turn is the fixed question; agents then
/// alternate until a reply ends with "Goodbye.", two consecutive replies are empty, or
/// 2 x max_turns_per_agent turns exist. A backend failure yields a partial transcript with
/// the failure recorded. Turn scores are left at -1 for the judge stage.
Transcript run_conversation(const GridDefinition& grid, const AgentSpec& opener, const AgentSpec& responder,
                            const Topic& topic, Gateway& gateway, const ConversationOptions& options,
                            std::uint64_t seed = 0);

struct JudgeStatement {
    int turn_index = 0;
    /// 1 for the opener, 2 for the responder.
    int agent_label = 1;
    std::string text;

    bool operator==(const JudgeStatement&) const = default;
};

struct JudgeWindow {
    std::vector<JudgeStatement> statements;

    /// "Agent 1: ...\nAgent 2: ..." over non-empty statements; " " when none has text.
    std::string serialize() const;
    bool blank() const;
};

/// The most recent <= 3 statements per speaker among turns 0..upto_turn, in turn order.
JudgeWindow build_judge_window(const Transcript& transcript, int upto_turn);

/// One scored conversation shown to the judge before the real window.
struct CalibrationExemplar {
    std::string conversation;
    int score = 3;
};

/// Exactly five exemplars, one per score 1..5. JSON: [{"conversation": str, "score": int}, ...].
std::vector<CalibrationExemplar> load_calibration(const std::filesystem::path& path);

struct JudgeOptions {
    std::string model_id;
    Sampling sampling{0.0, 8};
    std::string system_prompt;  // empty = verbatim default judge prompt
    std::vector<CalibrationExemplar> calibration;
};

/// Blank window -> -1 without a model call. Otherwise the judge prompt (plus calibration
/// exemplars as few-shot turns) and the window; the reply is parsed on [1,5] with "-1"
/// also accepted. Unparseable after one re-ask -> -1.
int judge_turn(const JudgeWindow& window, Gateway& judge, const JudgeOptions& options);

/// Scores every turn of a transcript and sets final_score. Partial transcripts are left as is.
Transcript judge_transcript(Transcript transcript, Gateway& judge, const JudgeOptions& options);

} // namespace latprof
