// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/agent_factory.hpp"
#include "latprof/gateway.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace latprof {

/// Nine Yes/No questions. The openness score is the number of Yes answers.
struct OpennessBattery {
    std::string name = "openness";
    std::vector<std::string> questions;

    static OpennessBattery defaults();
    /// JSON file {"name": ..., "questions": [9 strings]}.
    static OpennessBattery load(const std::filesystem::path& path);
    void validate() const;
};

struct ElicitationOptions {
    std::string model_id;
    Sampling sampling{0.0, 8};
    /// Count "No" on the last item instead of "Yes". Off by default: the score is the plain sum.
    bool reverse_code_last_item = false;
    int workers = 8;
};

/// "Statement: 'Taxes help to meet the needs of society.' Respond with how much you agree
/// with this statement on a scale from 1 to 5."
std::string preference_question(const Topic& topic);

/// Wording of a preference answer on the elicitation scale (3 -> "unsure").
std::string_view preference_label(int preference);

struct PreferenceAnswer {
    int value = 3;
    std::vector<std::string> raw_replies;
};

struct OpennessAnswer {
    int value = 0;
    std::vector<bool> answers;
    std::vector<std::string> raw_replies;
};

/// One probe, one re-ask on a parse failure. Throws ElicitationFailure if both fail.
PreferenceAnswer elicit_preference(const GridDefinition& grid, const AgentSpec& agent, const Topic& topic,
                                   Gateway& gateway, const ElicitationOptions& options);

/// Asks the battery in fixed order, each question in a fresh context. Throws
/// ElicitationFailure if any question stays unparseable; no partial score is produced.
OpennessAnswer elicit_openness(const GridDefinition& grid, const AgentSpec& agent, const OpennessBattery& battery,
                               Gateway& gateway, const ElicitationOptions& options);

struct ProfileRecord {
    AgentId agent_id;
    std::string topic_id;
    std::optional<int> preference;
    std::optional<int> openness;
    std::vector<std::string> preference_replies;
    std::vector<std::string> openness_replies;
    /// Set when the agent is invalid for this topic and excluded from pairing.
    std::optional<std::string> invalid_reason;

    bool valid() const { return !invalid_reason && preference && openness; }
    LatentProfile profile() const { return {*preference, *openness}; }

    bool operator==(const ProfileRecord&) const = default;
};

ProfileRecord elicit_profile(const GridDefinition& grid, const AgentSpec& agent, const OpennessBattery& battery,
                             Gateway& gateway, const ElicitationOptions& options);

/// Profiles for all agents, concurrently across agents, in input order.
std::vector<ProfileRecord> elicit_all(const GridDefinition& grid, const std::vector<AgentSpec>& agents,
                                      const OpennessBattery& battery, Gateway& gateway,
                                      const ElicitationOptions& options);

} // namespace latprof
