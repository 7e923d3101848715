// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/domain.hpp"
#include "latprof/prompts.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace latprof {

struct BiasClauses {
    std::string in_favor;
    std::string against;

    const std::string& for_polarity(Polarity p) const { return p == Polarity::InFavor ? in_favor : against; }
};

/// Everything needed to enumerate agents and assemble their prompts. Loaded from a
/// JSON grid file; defaults() reproduces the published topic, demographic and bias tables.
struct GridDefinition {
    std::vector<Topic> topics;

    std::vector<Region> regions;
    std::vector<AgeGroup> age_groups;
    std::vector<Gender> genders;
    std::vector<Urbanicity> urbanicities;
    std::vector<Education> educations;
    std::vector<BiasSpec> bias_variants;

    /// Keyed by Topic::bias_key.
    std::map<std::string, BiasClauses> implicit_clauses;
    std::map<std::string, BiasClauses> explicit_clauses;

    static GridDefinition defaults();

    const Topic& topic(std::string_view id) const;
    std::size_t demographic_count() const;

    /// Throws ConfigError on duplicate topic ids, empty value lists or a missing bias-clause row.
    void validate() const;
};

GridDefinition load_grid(const std::filesystem::path& path);
void save_grid(const GridDefinition& grid, const std::filesystem::path& path);

/// Demographics outer (region, age, gender, urbanicity, education), bias variant inner.
/// With the default grid this is 960 x 5 = 4800 agents per topic.
std::vector<AgentSpec> enumerate_agents(const GridDefinition& grid, const Topic& topic);

enum class PromptMode { Preference, Openness, Conversation };
std::string_view to_string(PromptMode m);

struct PromptBundle {
    std::string base_persona;
    std::string bias_clause;
    std::string preference_mode_suffix;
    std::string openness_mode_suffix;
    std::string conversation_mode_suffix;
};

/// "You are a man in their twenties from an urban part of the Midwestern United States. Your highest
/// level of educational attainment is Some High School."
std::string demographic_sentences(const DemographicProfile& d);

/// Bias clause for the agent's topic, empty when the bias level is none.
std::string bias_clause(const GridDefinition& grid, const AgentSpec& spec);

PromptBundle build_prompt_bundle(const GridDefinition& grid, const AgentSpec& spec);

/// Demographic sentences, bias clause (if any), then the consistency sentence.
std::string build_persona_prompt(const GridDefinition& grid, const AgentSpec& spec);

/// Persona prompt followed by the mode suffix.
std::string build_mode_prompt(const GridDefinition& grid, const AgentSpec& spec, PromptMode mode);

} // namespace latprof
