// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace latprof {

using AgentId = std::string;

/// Judge sentinel for an empty window or a missing score.
inline constexpr int kNoScore = -1;

// ---------------------------------------------------------------------------
// Topics

struct Topic {
    std::string id;
    std::string statement;
    int contentiousness = 1;
    /// Row key into the bias-clause tables ("taxes", "e-scooters", ...).
    std::string bias_key;
    /// Clause used after "Do you think that ". Derived from the statement when empty.
    std::string question_clause;

    /// Throws ConfigError if contentiousness is outside {1,2,3} or the statement is empty.
    void validate() const;
};

/// "Taxes help to meet the needs of society." -> "taxes help to meet the needs of society"
std::string question_clause_of(const Topic& topic);

// ---------------------------------------------------------------------------
// Demographics

enum class Region { Midwestern, Eastern, Southern, Western };
enum class AgeGroup { Twenties, Thirties, Forties, Fifties, Sixties };
enum class Gender { Man, Woman };
enum class Urbanicity { Rural, Exurban, Suburban, Urban };
enum class Education { SomeHighSchool, HighSchool, AssociatesDegree, SomeCollege, College, PostgraduateDegree };

inline constexpr std::array kAllRegions{Region::Midwestern, Region::Eastern, Region::Southern, Region::Western};
inline constexpr std::array kAllAgeGroups{AgeGroup::Twenties, AgeGroup::Thirties, AgeGroup::Forties,
                                          AgeGroup::Fifties, AgeGroup::Sixties};
inline constexpr std::array kAllGenders{Gender::Man, Gender::Woman};
inline constexpr std::array kAllUrbanicities{Urbanicity::Rural, Urbanicity::Exurban, Urbanicity::Suburban,
                                             Urbanicity::Urban};
inline constexpr std::array kAllEducations{Education::SomeHighSchool, Education::HighSchool,
                                           Education::AssociatesDegree, Education::SomeCollege,
                                           Education::College, Education::PostgraduateDegree};

std::string_view to_string(Region v);
std::string_view to_string(AgeGroup v);
std::string_view to_string(Gender v);
std::string_view to_string(Urbanicity v);
std::string_view to_string(Education v);

/// Article that precedes the value in persona sentences ("an" urban, "a" rural, "" Some High School).
std::string_view article_of(Urbanicity v);
std::string_view article_of(Education v);

// Label parsers. Throw ConfigError on an unknown label.
Region parse_region(std::string_view s);
AgeGroup parse_age_group(std::string_view s);
Gender parse_gender(std::string_view s);
Urbanicity parse_urbanicity(std::string_view s);
Education parse_education(std::string_view s);

struct DemographicProfile {
    Region region = Region::Midwestern;
    AgeGroup age_group = AgeGroup::Twenties;
    Gender gender = Gender::Man;
    Urbanicity urbanicity = Urbanicity::Rural;
    Education education = Education::SomeHighSchool;

    auto operator<=>(const DemographicProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Bias

enum class BiasLevel { None, Implicit, Explicit };
enum class Polarity { InFavor, Against };

std::string_view to_string(BiasLevel v);
std::string_view to_string(Polarity v);
BiasLevel parse_bias_level(std::string_view s);
Polarity parse_polarity(std::string_view s);

/// Stance injected into the persona prompt. Polarity is present iff level != None.
class BiasSpec {
public:
    BiasSpec() = default;
    BiasSpec(BiasLevel level, std::optional<Polarity> polarity);

    static BiasSpec none() { return {}; }
    static BiasSpec implicit(Polarity p) { return {BiasLevel::Implicit, p}; }
    static BiasSpec explicit_stance(Polarity p) { return {BiasLevel::Explicit, p}; }

    BiasLevel level() const noexcept { return level_; }
    std::optional<Polarity> polarity() const noexcept { return polarity_; }

    /// Main-text numbering: 1 none, 2 implicit, 3 explicit.
    int main_text_number() const noexcept { return static_cast<int>(level_) + 1; }
    /// Appendix numbering: 0 none, 1 implicit, 2 explicit.
    int appendix_number() const noexcept { return static_cast<int>(level_); }
    /// "implicit/in_favor", "none", ...
    std::string label() const;
    /// Both numbering schemes side by side, e.g. "B=2 (appendix B=1) in_favor".
    std::string dual_label() const;

    auto operator<=>(const BiasSpec&) const = default;

private:
    BiasLevel level_ = BiasLevel::None;
    std::optional<Polarity> polarity_;
};

/// none, implicit+, implicit-, explicit+, explicit-
inline const std::array<BiasSpec, 5>& all_bias_variants() {
    static const std::array<BiasSpec, 5> v{BiasSpec::none(), BiasSpec::implicit(Polarity::InFavor),
                                           BiasSpec::implicit(Polarity::Against),
                                           BiasSpec::explicit_stance(Polarity::InFavor),
                                           BiasSpec::explicit_stance(Polarity::Against)};
    return v;
}

// ---------------------------------------------------------------------------
// Agents and latent profiles

struct AgentSpec {
    AgentId agent_id;
    DemographicProfile demographics;
    BiasSpec bias;
    std::string topic_id;
};

/// Elicited internal state: preference P in [1,5], openness O in [0,9].
class LatentProfile {
public:
    LatentProfile(int preference, int openness);

    int preference() const noexcept { return preference_; }
    int openness() const noexcept { return openness_; }

    auto operator<=>(const LatentProfile&) const = default;

private:
    int preference_;
    int openness_;
};

struct ProfileTuple {
    int preference = 3;
    int openness = 0;
    BiasSpec bias;

    static ProfileTuple of(const LatentProfile& p, const BiasSpec& b) { return {p.preference(), p.openness(), b}; }
    std::string label() const;

    auto operator<=>(const ProfileTuple&) const = default;
};

/// Unordered pair of profile tuples, stored with first <= second.
struct PairKey {
    ProfileTuple first;
    ProfileTuple second;

    std::string label() const;
    auto operator<=>(const PairKey&) const = default;
};

/// |P_a - P_b|, in [0,4].
int preference_gap(const LatentProfile& a, const LatentProfile& b) noexcept;
int preference_gap(int pa, int pb) noexcept;

PairKey canonical_pair_key(const ProfileTuple& u, const ProfileTuple& v);

// ---------------------------------------------------------------------------
// Conversations

struct Turn {
    int index = 0;
    AgentId speaker;
    std::string text;
    int judge_score = kNoScore;

    bool operator==(const Turn&) const = default;
};

enum class EndReason { Goodbye, DoubleEmpty, TurnCap, Failure };
std::string_view to_string(EndReason v);
EndReason parse_end_reason(std::string_view s);

struct TranscriptMetadata {
    std::string agent_model;
    std::string judge_model;
    std::string started_at;
    std::string finished_at;
    bool calibrated = false;

    bool operator==(const TranscriptMetadata&) const = default;
};

struct Transcript {
    std::string conversation_id;
    /// (opener, responder)
    std::pair<AgentId, AgentId> pair;
    std::string topic_id;
    std::vector<Turn> turns;
    std::optional<int> final_score;
    std::uint64_t seed = 0;
    EndReason end_reason = EndReason::TurnCap;
    /// Set when the backend failed mid-conversation; such transcripts are excluded from analysis.
    std::optional<std::string> failure;
    bool judged = false;
    TranscriptMetadata metadata;

    const AgentId& opener() const { return pair.first; }
    const AgentId& responder() const { return pair.second; }
    bool partial() const { return failure.has_value(); }

    bool operator==(const Transcript&) const = default;
};

/// Last judge score != -1 in turn order, if any.
std::optional<int> final_agreement(const std::vector<Turn>& turns);
inline std::optional<int> final_agreement(const Transcript& t) { return final_agreement(t.turns); }

/// Throws Error when a persisted transcript breaks its invariants: turn cap, alternation,
/// score range, or final_score disagreeing with the retention rule.
void check_transcript(const Transcript& t, int max_turns_per_agent);

} // namespace latprof
