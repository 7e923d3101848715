// SPDX-License-Identifier: Apache-2.0
#include "latprof/scripted_backend.hpp"

#include "latprof/domain.hpp"
#include "latprof/errors.hpp"
#include "latprof/prompts.hpp"
#include "latprof/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace latprof {

namespace {

constexpr std::array<std::string_view, 3> kAgreeReplies{
    "I agree with you completely.",
    "I agree with you completely, that is exactly how I see it too.",
    "I agree with you completely and I have nothing to add to that.",
};

constexpr std::array<std::string_view, 3> kDisagreeReplies{
    "I disagree with you completely.",
    "I disagree with you completely, I see it the other way around.",
    "I disagree with you completely and I am not going to change my mind.",
};

constexpr std::string_view kFillerReply = "That is a fair point, tell me more about why you think so.";
constexpr std::string_view kGoodbyeReply = "I think we have covered everything there is to say. Goodbye.";

std::string stance_text(int view, std::size_t variant) {
    const std::string v = std::to_string(view);
    switch (variant % 3) {
    case 0: return "My view on this is " + v + " out of 5.";
    case 1: return "I would put myself at " + v + " out of 5 on this.";
    default: return "Honestly, I am at " + v + " out of 5 here.";
    }
}

std::uint64_t request_hash(const ChatRequest& r) {
    std::string key = r.system_prompt;
    for (const auto& m : r.messages) {
        key += '\x1f';
        key += m.content;
    }
    return derive_seed(0, key);
}

enum class Mode { Preference, Openness, Conversation, Judge };

Mode mode_of(const ChatRequest& r) {
    if (r.system_prompt.starts_with(kJudgePromptPrefix)) return Mode::Judge;
    if (r.system_prompt.find(kPreferenceModeSuffix) != std::string::npos) return Mode::Preference;
    if (r.system_prompt.find(kOpennessModeSuffix) != std::string::npos) return Mode::Openness;
    if (r.system_prompt.find(kConversationModeSuffix) != std::string::npos) return Mode::Conversation;
    throw Error("scripted backend cannot tell the prompt mode from the system prompt");
}

const ChatMessage* first_user(const ChatRequest& r) {
    for (const auto& m : r.messages)
        if (m.role == Role::User) return &m;
    return nullptr;
}

const ChatMessage* last_with_role(const ChatRequest& r, Role role) {
    for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it)
        if (it->role == role) return &*it;
    return nullptr;
}

enum class Stance { None, Agree, Disagree };

Stance categorical_stance(std::string_view s) {
    if (s.find("I disagree") != std::string_view::npos) return Stance::Disagree;
    if (s.find("I agree") != std::string_view::npos) return Stance::Agree;
    return Stance::None;
}

} // namespace

std::string_view to_string(ConversationPolicy p) {
    switch (p) {
    case ConversationPolicy::AlwaysAgree: return "always_agree";
    case ConversationPolicy::AlwaysDisagree: return "always_disagree";
    case ConversationPolicy::Echo: return "echo";
    case ConversationPolicy::GoodbyeAfterK: return "goodbye_after_k";
    case ConversationPolicy::Stance: return "stance";
    }
    return "?";
}

std::string_view to_string(JudgePolicy p) { return p == JudgePolicy::StanceMatch ? "stance_match" : "constant"; }

ConversationPolicy parse_conversation_policy(std::string_view s) {
    for (auto p : {ConversationPolicy::AlwaysAgree, ConversationPolicy::AlwaysDisagree, ConversationPolicy::Echo,
                   ConversationPolicy::GoodbyeAfterK, ConversationPolicy::Stance})
        if (to_string(p) == s) return p;
    throw ConfigError("unknown conversation policy '" + std::string(s) + "'");
}

JudgePolicy parse_judge_policy(std::string_view s) {
    if (s == "stance_match") return JudgePolicy::StanceMatch;
    if (s == "constant") return JudgePolicy::Constant;
    throw ConfigError("unknown judge policy '" + std::string(s) + "'");
}

int ScriptedBehavior::openness() const {
    return static_cast<int>(std::count(openness_answers.begin(), openness_answers.end(), true));
}

void ScriptedPatch::apply_to(ScriptedBehavior& b) const {
    if (preference_answer) b.preference_answer = *preference_answer;
    if (openness_answers) b.openness_answers = *openness_answers;
    if (conversation) b.conversation = *conversation;
    if (goodbye_k) b.goodbye_k = *goodbye_k;
    if (judge) b.judge = *judge;
    if (judge_constant) b.judge_constant = *judge_constant;
    if (preference_reply) b.preference_reply = *preference_reply;
    if (openness_reply) b.openness_reply = *openness_reply;
}

ScriptedBackend::ScriptedBackend(ScriptedConfig config, std::vector<std::string> battery)
    : config_(std::move(config)), battery_(std::move(battery)) {
    if (battery_.empty()) battery_.assign(kDefaultOpennessQuestions.begin(), kDefaultOpennessQuestions.end());
}

ScriptedBackend::ScriptedBackend(ScriptedBehavior behavior) : ScriptedBackend(ScriptedConfig{std::move(behavior), {}}) {}

ScriptedBehavior ScriptedBackend::behavior_for(const ChatRequest& request) const {
    ScriptedBehavior b = config_.defaults;
    for (const auto& rule : config_.rules)
        if (request.system_prompt.find(rule.system_contains) != std::string::npos) rule.patch.apply_to(b);
    return b;
}

std::optional<int> stated_view(std::string_view text) {
    constexpr std::string_view marker = " out of 5";
    const auto pos = text.find(marker);
    if (pos == std::string_view::npos || pos == 0) return std::nullopt;
    const char c = text[pos - 1];
    if (c < '1' || c > '5') return std::nullopt;
    return c - '0';
}

std::string scripted_conversation_reply(const ScriptedBehavior& b, const ChatRequest& request) {
    const std::size_t variant = request_hash(request);
    const auto own_turns = std::count_if(request.messages.begin(), request.messages.end(),
                                         [](const ChatMessage& m) { return m.role == Role::Assistant; });
    switch (b.conversation) {
    case ConversationPolicy::AlwaysAgree: return std::string(kAgreeReplies[variant % kAgreeReplies.size()]);
    case ConversationPolicy::AlwaysDisagree: return std::string(kDisagreeReplies[variant % kDisagreeReplies.size()]);
    case ConversationPolicy::Echo: {
        const ChatMessage* last = last_with_role(request, Role::User);
        return last ? last->content : std::string();
    }
    case ConversationPolicy::GoodbyeAfterK:
        return std::string(own_turns >= b.goodbye_k ? kGoodbyeReply : kFillerReply);
    case ConversationPolicy::Stance: {
        int view = b.preference_answer;
        if (const ChatMessage* mine = last_with_role(request, Role::Assistant))
            if (auto v = stated_view(mine->content)) view = *v;
        if (const ChatMessage* theirs = last_with_role(request, Role::User))
            if (auto v = stated_view(theirs->content)) {
                const double shift = (*v - view) * (b.openness() / 9.0);
                view += static_cast<int>(std::lround(shift));
            }
        return stance_text(std::clamp(view, 1, 5), variant);
    }
    }
    return {};
}

int scripted_judge_score(std::string_view window) {
    if (trim(window).empty()) return kNoScore;
    // Last statement per speaker; continuation lines belong to the previous statement.
    std::array<std::string, 2> last{};
    std::array<bool, 2> seen{};
    int current = -1;
    std::size_t start = 0;
    while (start <= window.size()) {
        auto end = window.find('\n', start);
        if (end == std::string_view::npos) end = window.size();
        const std::string_view line = window.substr(start, end - start);
        if (line.starts_with("Agent 1: ") || line.starts_with("Agent 2: ")) {
            current = line[6] - '1';
            last[current] = std::string(line.substr(9));
            seen[current] = true;
        } else if (current >= 0) {
            last[current] += '\n';
            last[current] += line;
        }
        start = end + 1;
    }
    if (!seen[0] || !seen[1]) return 3;
    const auto va = stated_view(last[0]);
    const auto vb = stated_view(last[1]);
    if (va && vb) return 5 - std::abs(*va - *vb);
    const Stance sa = categorical_stance(last[0]);
    const Stance sb = categorical_stance(last[1]);
    if (va || vb || sa == Stance::None || sb == Stance::None) return 3;
    return (sa == Stance::Agree && sb == Stance::Agree) ? 5 : 1;
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    const ScriptedBehavior b = behavior_for(request);
    switch (mode_of(request)) {
    case Mode::Preference: return b.preference_reply.value_or(std::to_string(b.preference_answer));
    case Mode::Openness: {
        if (b.openness_reply) return *b.openness_reply;
        const ChatMessage* q = first_user(request);
        if (!q) throw Error("openness request carries no question");
        const auto it = std::find(battery_.begin(), battery_.end(), q->content);
        if (it == battery_.end()) return "No";
        const auto idx = static_cast<std::size_t>(it - battery_.begin());
        return (idx < b.openness_answers.size() && b.openness_answers[idx]) ? "Yes" : "No";
    }
    case Mode::Conversation: return scripted_conversation_reply(b, request);
    case Mode::Judge: {
        const ChatMessage* window = last_with_role(request, Role::User);
        if (!window) throw Error("judge request carries no window");
        const JudgePolicy policy = b.judge.value_or(JudgePolicy::StanceMatch);
        if (policy == JudgePolicy::Constant) return std::to_string(b.judge_constant);
        return std::to_string(scripted_judge_score(window->content));
    }
    }
    return {};
}

} // namespace latprof
