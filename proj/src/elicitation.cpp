// SPDX-License-Identifier: Apache-2.0
#include "latprof/elicitation.hpp"

#include "latprof/errors.hpp"
#include "latprof/io.hpp"
#include "latprof/parallel.hpp"
#include "latprof/prompts.hpp"

#include <spdlog/spdlog.h>

namespace latprof {

namespace {

template <typename Parse>
auto ask_with_reask(Gateway& gateway, ChatRequest request, std::string_view reask, Parse parse,
                    std::vector<std::string>& raw) {
    std::string reply = gateway.chat(request);
    raw.push_back(reply);
    try {
        return parse(reply);
    } catch (const ParseError&) {
    }
    request.messages.push_back({Role::Assistant, reply});
    request.messages.push_back({Role::User, std::string(reask)});
    reply = gateway.chat(request);
    raw.push_back(reply);
    try {
        return parse(reply);
    } catch (const ParseError& e) {
        throw ElicitationFailure(std::string("unparseable after re-ask: ") + e.what());
    }
}

} // namespace

OpennessBattery OpennessBattery::defaults() {
    OpennessBattery b;
    b.questions.assign(kDefaultOpennessQuestions.begin(), kDefaultOpennessQuestions.end());
    return b;
}

OpennessBattery OpennessBattery::load(const std::filesystem::path& path) {
    const auto j = read_json_file(path);
    OpennessBattery b;
    try {
        b.name = j.value("name", std::string("openness"));
        b.questions = j.at("questions").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("battery file " + path.string() + ": " + e.what());
    }
    b.validate();
    return b;
}

void OpennessBattery::validate() const {
    if (questions.size() != 9)
        throw ConfigError("battery must have exactly 9 questions, got " + std::to_string(questions.size()));
    for (const auto& q : questions)
        if (q.empty()) throw ConfigError("battery contains an empty question");
}

std::string preference_question(const Topic& topic) {
    return "Statement: '" + topic.statement +
           "' Respond with how much you agree with this statement on a scale from 1 to 5.";
}

std::string_view preference_label(int preference) {
    if (preference < 1 || preference > 5) throw Error("preference out of range");
    return kPreferenceScaleLabels[static_cast<std::size_t>(preference - 1)];
}

PreferenceAnswer elicit_preference(const GridDefinition& grid, const AgentSpec& agent, const Topic& topic,
                                   Gateway& gateway, const ElicitationOptions& options) {
    ChatRequest request;
    request.system_prompt = build_mode_prompt(grid, agent, PromptMode::Preference);
    request.messages.push_back({Role::User, preference_question(topic)});
    request.sampling = options.sampling;
    request.model_id = options.model_id;

    PreferenceAnswer out;
    out.value = ask_with_reask(
        gateway, std::move(request), kPreferenceReask, [](const std::string& r) { return parse_scale_answer(r, 1, 5); },
        out.raw_replies);
    return out;
}

OpennessAnswer elicit_openness(const GridDefinition& grid, const AgentSpec& agent, const OpennessBattery& battery,
                               Gateway& gateway, const ElicitationOptions& options) {
    battery.validate();
    const std::string system = build_mode_prompt(grid, agent, PromptMode::Openness);
    OpennessAnswer out;
    for (std::size_t i = 0; i < battery.questions.size(); ++i) {
        ChatRequest request;
        request.system_prompt = system;
        request.messages.push_back({Role::User, battery.questions[i]});
        request.sampling = options.sampling;
        request.model_id = options.model_id;
        const bool yes = ask_with_reask(gateway, std::move(request), kOpennessReask,
                                        [](const std::string& r) { return parse_yes_no(r); }, out.raw_replies);
        out.answers.push_back(yes);
        const bool reversed = options.reverse_code_last_item && i + 1 == battery.questions.size();
        if (yes != reversed) ++out.value;
    }
    return out;
}

ProfileRecord elicit_profile(const GridDefinition& grid, const AgentSpec& agent, const OpennessBattery& battery,
                             Gateway& gateway, const ElicitationOptions& options) {
    ProfileRecord rec;
    rec.agent_id = agent.agent_id;
    rec.topic_id = agent.topic_id;
    try {
        auto p = elicit_preference(grid, agent, grid.topic(agent.topic_id), gateway, options);
        rec.preference = p.value;
        rec.preference_replies = std::move(p.raw_replies);
        auto o = elicit_openness(grid, agent, battery, gateway, options);
        rec.openness = o.value;
        rec.openness_replies = std::move(o.raw_replies);
    } catch (const ElicitationFailure& e) {
        rec.preference.reset();
        rec.openness.reset();
        rec.invalid_reason = e.what();
        spdlog::info("agent {} invalid for topic {}: {}", agent.agent_id, agent.topic_id, e.what());
    }
    return rec;
}

std::vector<ProfileRecord> elicit_all(const GridDefinition& grid, const std::vector<AgentSpec>& agents,
                                      const OpennessBattery& battery, Gateway& gateway,
                                      const ElicitationOptions& options) {
    std::vector<ProfileRecord> out(agents.size());
    parallel_for(agents.size(), options.workers,
                 [&](std::size_t i) { out[i] = elicit_profile(grid, agents[i], battery, gateway, options); });
    return out;
}

} // namespace latprof
