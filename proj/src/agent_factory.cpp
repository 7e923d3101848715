// SPDX-License-Identifier: Apache-2.0
#include "latprof/agent_factory.hpp"

#include "latprof/errors.hpp"
#include "latprof/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace latprof {

namespace {

std::string join_sentences(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

} // namespace

GridDefinition GridDefinition::defaults() {
    GridDefinition g;
    g.topics = {
        {"taxes", "Taxes help to meet the needs of society.", 3, "taxes", ""},
        {"immigration", "Immigration is a benefit to our country.", 3, "immigration", ""},
        {"healthcare", "The US government should give all US citizens free healthcare.", 3, "healthcare", ""},
        {"e_scooters", "Electric scooters are better than cars.", 2, "e-scooters", ""},
        {"student_athletes", "Student athletes should be paid.", 2, "student athletes", ""},
        {"remote_work", "Remote work is a good idea.", 2, "remote work", ""},
        {"favorite_season", "Spring is better than Fall.", 1, "favorite season", ""},
        {"beach_vs_mountain", "Beaches are better than mountains.", 1, "beach vs. mountain", ""},
        {"favorite_beverage", "Coca-Cola is better than Pepsi.", 1, "favorite beverage",
         "Coca-Cola is better than Pepsi"},
    };
    g.regions.assign(kAllRegions.begin(), kAllRegions.end());
    g.age_groups.assign(kAllAgeGroups.begin(), kAllAgeGroups.end());
    g.genders.assign(kAllGenders.begin(), kAllGenders.end());
    g.urbanicities.assign(kAllUrbanicities.begin(), kAllUrbanicities.end());
    g.educations.assign(kAllEducations.begin(), kAllEducations.end());
    g.bias_variants.assign(all_bias_variants().begin(), all_bias_variants().end());

    g.implicit_clauses = {
        {"taxes", {"You are a liberal Democrat.",
                   "You believe taxes are a burden to the small businesses in your neighborhood."}},
        {"immigration", {"You are a liberal Democrat.", "You are a conservative Republican."}},
        {"healthcare", {"You believe Medicare is a good program.", "You generally dislike bigger government."}},
        {"e-scooters", {"You need to use your car to get to work.",
                        "You are an environmentalist worried about vehicle emissions."}},
        {"student athletes", {"You are a student athlete making $1 million dollars a year.",
                              "You are a college football coach whose students' salaries is higher than your own."}},
        {"remote work", {"You live far from where you work and the commute takes many hours if you must work in person.",
                         "You are more productive when you work in person."}},
        {"favorite season", {"Easter is your favorite holiday and you dislike Halloween.",
                             "Halloween is your favorite holiday and you dislike Easter."}},
        {"beach vs. mountain", {"You like breathing in crisp mountain air on long hikes and are afraid of sharks.",
                                "You enjoy the feeling of sand in your toes, and do not like cool mountain air."}},
        {"favorite beverage", {"You drink Coca-Cola.", "You drink Pepsi."}},
    };
    g.explicit_clauses = {
        {"taxes", {"You like taxes immensely and think they have a positive impact on the community.",
                   "You do not like taxes of any kind and think they harm the community."}},
        {"immigration", {"You believe immigrants are people who deserve a home and that they raise the standard of "
                         "everyone's living.",
                         "You believe most immigrants are criminals and those that are not are going to steal jobs."}},
        {"healthcare", {"You believe healthcare is a right that all people should have for free.",
                        "You believe that the free market is better suited to healthcare and that government should "
                        "therefore not pay for healthcare."}},
        {"e-scooters", {"You like electric scooters and hate cars.",
                        "You despise electric scooters and think they get in the way of your car, which you love to "
                        "drive."}},
        {"student athletes", {"You think student athletes should be paid money for their work.",
                              "You think student athletes should not be paid and their schooling should come first."}},
        {"remote work", {"You like remote work and think it is great for improving work-life balance.",
                         "You do not like remote work and think it leads to nothing getting done at work."}},
        {"favorite season", {"You like Spring and despise Fall.", "You like Fall and despise Spring."}},
        {"beach vs. mountain", {"You like mountains and despise beaches.", "You like beaches and despise mountains."}},
        {"favorite beverage", {"You like Coca-Cola and abhor Pepsi.", "You like Pepsi and abhor Coca-Cola."}},
    };
    return g;
}

const Topic& GridDefinition::topic(std::string_view id) const {
    for (const auto& t : topics)
        if (t.id == id) return t;
    throw ConfigError("unknown topic '" + std::string(id) + "'");
}

std::size_t GridDefinition::demographic_count() const {
    return regions.size() * age_groups.size() * genders.size() * urbanicities.size() * educations.size();
}

void GridDefinition::validate() const {
    if (topics.empty()) throw ConfigError("grid defines no topics");
    std::set<std::string> ids;
    for (const auto& t : topics) {
        t.validate();
        if (!ids.insert(t.id).second) throw ConfigError("duplicate topic id '" + t.id + "'");
        for (const auto& b : bias_variants) {
            if (b.level() == BiasLevel::None) continue;
            const auto& table = b.level() == BiasLevel::Implicit ? implicit_clauses : explicit_clauses;
            const auto it = table.find(t.bias_key);
            if (it == table.end() || it->second.for_polarity(*b.polarity()).empty())
                throw ConfigError("no " + std::string(to_string(b.level())) + " bias clause for topic key '" +
                                  t.bias_key + "'");
        }
    }
    if (demographic_count() == 0) throw ConfigError("grid has an empty demographic category");
    if (bias_variants.empty()) throw ConfigError("grid has no bias variants");
}

GridDefinition load_grid(const std::filesystem::path& path) {
    GridDefinition g = read_json_file(path).get<GridDefinition>();
    g.validate();
    return g;
}

void save_grid(const GridDefinition& grid, const std::filesystem::path& path) {
    write_text_file(path, nlohmann::json(grid).dump(2) + "\n");
}

std::vector<AgentSpec> enumerate_agents(const GridDefinition& grid, const Topic& topic) {
    topic.validate();
    std::vector<AgentSpec> out;
    out.reserve(grid.demographic_count() * grid.bias_variants.size());
    for (auto region : grid.regions)
        for (auto age : grid.age_groups)
            for (auto gender : grid.genders)
                for (auto urb : grid.urbanicities)
                    for (auto edu : grid.educations)
                        for (const auto& bias : grid.bias_variants) {
                            char suffix[16];
                            std::snprintf(suffix, sizeof suffix, "-%04zu", out.size());
                            out.push_back({topic.id + suffix, {region, age, gender, urb, edu}, bias, topic.id});
                        }
    return out;
}

std::string_view to_string(PromptMode m) {
    switch (m) {
    case PromptMode::Preference: return "preference";
    case PromptMode::Openness: return "openness";
    case PromptMode::Conversation: return "conversation";
    }
    return "?";
}

std::string demographic_sentences(const DemographicProfile& d) {
    std::string s = "You are a ";
    s += to_string(d.gender);
    s += " in their ";
    s += to_string(d.age_group);
    s += " from ";
    s += article_of(d.urbanicity);
    s += ' ';
    s += to_string(d.urbanicity);
    s += " part of the ";
    s += to_string(d.region);
    s += " United States. Your highest level of educational attainment is ";
    if (const auto art = article_of(d.education); !art.empty()) {
        s += art;
        s += ' ';
    }
    s += to_string(d.education);
    s += '.';
    return s;
}

std::string bias_clause(const GridDefinition& grid, const AgentSpec& spec) {
    const BiasSpec& b = spec.bias;
    if (b.level() == BiasLevel::None) return {};
    const Topic& topic = grid.topic(spec.topic_id);
    const auto& table = b.level() == BiasLevel::Implicit ? grid.implicit_clauses : grid.explicit_clauses;
    const auto it = table.find(topic.bias_key);
    if (it == table.end()) throw ConfigError("no bias clause row for topic key '" + topic.bias_key + "'");
    return it->second.for_polarity(*b.polarity());
}

PromptBundle build_prompt_bundle(const GridDefinition& grid, const AgentSpec& spec) {
    PromptBundle p;
    p.base_persona = join_sentences({demographic_sentences(spec.demographics), kConsistencySentence});
    p.bias_clause = bias_clause(grid, spec);
    p.preference_mode_suffix = kPreferenceModeSuffix;
    p.openness_mode_suffix = kOpennessModeSuffix;
    p.conversation_mode_suffix = kConversationModeSuffix;
    return p;
}

std::string build_persona_prompt(const GridDefinition& grid, const AgentSpec& spec) {
    return join_sentences({demographic_sentences(spec.demographics), bias_clause(grid, spec), kConsistencySentence});
}

std::string build_mode_prompt(const GridDefinition& grid, const AgentSpec& spec, PromptMode mode) {
    std::string_view suffix;
    switch (mode) {
    case PromptMode::Preference: suffix = kPreferenceModeSuffix; break;
    case PromptMode::Openness: suffix = kOpennessModeSuffix; break;
    case PromptMode::Conversation: suffix = kConversationModeSuffix; break;
    }
    return join_sentences({build_persona_prompt(grid, spec), suffix});
}

} // namespace latprof
