// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/gateway.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace latprof {

enum class ConversationPolicy {
    AlwaysAgree,
    AlwaysDisagree,
    Echo,
    GoodbyeAfterK,
    /// States a 1-5 view, starting at the preference answer and moving toward the partner's
    /// last stated view by openness/9 of the distance on every turn.
    Stance,
};

enum class JudgePolicy {
    /// Compares the last stance of each speaker in the window (see scripted_judge_score).
    StanceMatch,
    Constant,
};

std::string_view to_string(ConversationPolicy p);
std::string_view to_string(JudgePolicy p);
ConversationPolicy parse_conversation_policy(std::string_view s);
JudgePolicy parse_judge_policy(std::string_view s);

/// Offline stand-in for a model. Replies are a pure function of (behavior, request).
struct ScriptedBehavior {
    int preference_answer = 3;
    std::array<bool, 9> openness_answers{};
    ConversationPolicy conversation = ConversationPolicy::Echo;
    /// For GoodbyeAfterK: the reply ends with "Goodbye." once the agent has already spoken k times.
    int goodbye_k = 1;
    std::optional<JudgePolicy> judge;
    int judge_constant = 3;
    /// Raw reply overrides for exercising the parsers.
    std::optional<std::string> preference_reply;
    std::optional<std::string> openness_reply;

    int openness() const;
};

/// Partial behavior applied when a rule matches.
struct ScriptedPatch {
    std::optional<int> preference_answer;
    std::optional<std::array<bool, 9>> openness_answers;
    std::optional<ConversationPolicy> conversation;
    std::optional<int> goodbye_k;
    std::optional<JudgePolicy> judge;
    std::optional<int> judge_constant;
    std::optional<std::string> preference_reply;
    std::optional<std::string> openness_reply;

    void apply_to(ScriptedBehavior& b) const;
};

/// Every rule whose needle occurs in the system prompt is applied, in order, on top of the default.
struct ScriptedRule {
    std::string system_contains;
    ScriptedPatch patch;
};

struct ScriptedConfig {
    ScriptedBehavior defaults;
    std::vector<ScriptedRule> rules;
};

class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(ScriptedConfig config,
                             std::vector<std::string> battery = {});
    explicit ScriptedBackend(ScriptedBehavior behavior);

    std::string complete(const ChatRequest& request) override;
    std::string describe() const override { return "scripted"; }

    ScriptedBehavior behavior_for(const ChatRequest& request) const;

private:
    ScriptedConfig config_;
    std::vector<std::string> battery_;
};

/// Reply of a scripted agent in conversation mode.
std::string scripted_conversation_reply(const ScriptedBehavior& b, const ChatRequest& request);

/// Score of the stance-matching judge for a serialized window ("Agent 1: ...\nAgent 2: ...").
/// Numeric views on both sides: 5 - |a - b|. Agree/agree: 5. Agree/disagree or
/// disagree/disagree: 1. Missing or stance-less side: 3. Blank window: -1.
int scripted_judge_score(std::string_view window);

/// View stated in a Stance reply ("... 4 out of 5 ..."), if any.
std::optional<int> stated_view(std::string_view text);

} // namespace latprof
