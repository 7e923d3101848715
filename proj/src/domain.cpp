// SPDX-License-Identifier: Apache-2.0
#include "latprof/domain.hpp"

#include "latprof/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace latprof {

namespace {

template <typename E, std::size_t N>
struct LabelTable {
    std::array<std::pair<E, std::string_view>, N> entries;

    std::string_view name(E v) const {
        for (const auto& [e, s] : entries)
            if (e == v) return s;
        return "?";
    }

    E parse(std::string_view s, std::string_view what) const {
        for (const auto& [e, label] : entries)
            if (label == s) return e;
        throw ConfigError("unknown " + std::string(what) + " value '" + std::string(s) + "'");
    }
};

constexpr LabelTable<Region, 4> kRegions{{{{Region::Midwestern, "Midwestern"},
                                           {Region::Eastern, "Eastern"},
                                           {Region::Southern, "Southern"},
                                           {Region::Western, "Western"}}}};

constexpr LabelTable<AgeGroup, 5> kAges{{{{AgeGroup::Twenties, "twenties"},
                                          {AgeGroup::Thirties, "thirties"},
                                          {AgeGroup::Forties, "forties"},
                                          {AgeGroup::Fifties, "fifties"},
                                          {AgeGroup::Sixties, "sixties"}}}};

constexpr LabelTable<Gender, 2> kGenders{{{{Gender::Man, "man"}, {Gender::Woman, "woman"}}}};

constexpr LabelTable<Urbanicity, 4> kUrbanicities{{{{Urbanicity::Rural, "rural"},
                                                    {Urbanicity::Exurban, "exurban"},
                                                    {Urbanicity::Suburban, "suburban"},
                                                    {Urbanicity::Urban, "urban"}}}};

constexpr LabelTable<Education, 6> kEducations{{{{Education::SomeHighSchool, "Some High School"},
                                                 {Education::HighSchool, "High School"},
                                                 {Education::AssociatesDegree, "Associate's Degree"},
                                                 {Education::SomeCollege, "Some College"},
                                                 {Education::College, "College"},
                                                 {Education::PostgraduateDegree, "Postgraduate Degree"}}}};

constexpr LabelTable<BiasLevel, 3> kBiasLevels{
    {{{BiasLevel::None, "none"}, {BiasLevel::Implicit, "implicit"}, {BiasLevel::Explicit, "explicit"}}}};

constexpr LabelTable<Polarity, 2> kPolarities{{{{Polarity::InFavor, "in_favor"}, {Polarity::Against, "against"}}}};

constexpr LabelTable<EndReason, 4> kEndReasons{{{{EndReason::Goodbye, "goodbye"},
                                                 {EndReason::DoubleEmpty, "double_empty"},
                                                 {EndReason::TurnCap, "turn_cap"},
                                                 {EndReason::Failure, "failure"}}}};

} // namespace

void Topic::validate() const {
    if (id.empty()) throw ConfigError("topic id is empty");
    if (statement.empty()) throw ConfigError("topic '" + id + "' has an empty statement");
    if (contentiousness < 1 || contentiousness > 3)
        throw ConfigError("topic '" + id + "' contentiousness must be 1, 2 or 3, got " +
                          std::to_string(contentiousness));
}

std::string question_clause_of(const Topic& topic) {
    if (!topic.question_clause.empty()) return topic.question_clause;
    std::string s = topic.statement;
    while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
    // Lower the leading capital unless the first word is an acronym ("US ...").
    if (s.size() >= 2 && std::isupper(static_cast<unsigned char>(s[0])) &&
        !std::isupper(static_cast<unsigned char>(s[1])))
        s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::string_view to_string(Region v) { return kRegions.name(v); }
std::string_view to_string(AgeGroup v) { return kAges.name(v); }
std::string_view to_string(Gender v) { return kGenders.name(v); }
std::string_view to_string(Urbanicity v) { return kUrbanicities.name(v); }
std::string_view to_string(Education v) { return kEducations.name(v); }
std::string_view to_string(BiasLevel v) { return kBiasLevels.name(v); }
std::string_view to_string(Polarity v) { return kPolarities.name(v); }
std::string_view to_string(EndReason v) { return kEndReasons.name(v); }

std::string_view article_of(Urbanicity v) {
    return (v == Urbanicity::Exurban || v == Urbanicity::Urban) ? "an" : "a";
}

std::string_view article_of(Education v) {
    switch (v) {
    case Education::AssociatesDegree: return "an";
    case Education::PostgraduateDegree: return "a";
    default: return "";
    }
}

Region parse_region(std::string_view s) { return kRegions.parse(s, "region"); }
AgeGroup parse_age_group(std::string_view s) { return kAges.parse(s, "age group"); }
Gender parse_gender(std::string_view s) { return kGenders.parse(s, "gender"); }
Urbanicity parse_urbanicity(std::string_view s) { return kUrbanicities.parse(s, "urbanicity"); }
Education parse_education(std::string_view s) { return kEducations.parse(s, "education"); }
BiasLevel parse_bias_level(std::string_view s) { return kBiasLevels.parse(s, "bias level"); }
Polarity parse_polarity(std::string_view s) { return kPolarities.parse(s, "polarity"); }
EndReason parse_end_reason(std::string_view s) { return kEndReasons.parse(s, "end reason"); }

BiasSpec::BiasSpec(BiasLevel level, std::optional<Polarity> polarity) : level_(level), polarity_(polarity) {
    if ((level == BiasLevel::None) == polarity.has_value())
        throw ConfigError("bias polarity must be present exactly when the level is not 'none'");
}

std::string BiasSpec::label() const {
    std::string s(to_string(level_));
    if (polarity_) {
        s += '/';
        s += to_string(*polarity_);
    }
    return s;
}

std::string BiasSpec::dual_label() const {
    std::string s = "B=" + std::to_string(main_text_number()) + " (appendix B=" + std::to_string(appendix_number()) + ")";
    if (polarity_) {
        s += ' ';
        s += to_string(*polarity_);
    }
    return s;
}

LatentProfile::LatentProfile(int preference, int openness) : preference_(preference), openness_(openness) {
    if (preference < 1 || preference > 5)
        throw Error("preference must be in [1,5], got " + std::to_string(preference));
    if (openness < 0 || openness > 9) throw Error("openness must be in [0,9], got " + std::to_string(openness));
}

std::string ProfileTuple::label() const {
    return "P" + std::to_string(preference) + "/O" + std::to_string(openness) + "/" + bias.label();
}

std::string PairKey::label() const { return first.label() + " x " + second.label(); }

int preference_gap(int pa, int pb) noexcept { return std::abs(pa - pb); }

int preference_gap(const LatentProfile& a, const LatentProfile& b) noexcept {
    return preference_gap(a.preference(), b.preference());
}

PairKey canonical_pair_key(const ProfileTuple& u, const ProfileTuple& v) {
    if (v < u) return {v, u};
    return {u, v};
}

std::optional<int> final_agreement(const std::vector<Turn>& turns) {
    for (auto it = turns.rbegin(); it != turns.rend(); ++it)
        if (it->judge_score != kNoScore) return it->judge_score;
    return std::nullopt;
}

void check_transcript(const Transcript& t, int max_turns_per_agent) {
    const auto fail = [&](const std::string& why) {
        throw Error("transcript " + t.conversation_id + ": " + why);
    };
    if (t.turns.size() > static_cast<std::size_t>(2 * max_turns_per_agent))
        fail("has " + std::to_string(t.turns.size()) + " turns, cap is " + std::to_string(2 * max_turns_per_agent));
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        const Turn& turn = t.turns[i];
        if (turn.index != static_cast<int>(i)) fail("turn indices are not contiguous");
        const AgentId& expected = (i % 2 == 0) ? t.opener() : t.responder();
        if (turn.speaker != expected) fail("speakers do not alternate at turn " + std::to_string(i));
        if (turn.judge_score != kNoScore && (turn.judge_score < 1 || turn.judge_score > 5))
            fail("judge score out of range at turn " + std::to_string(i));
    }
    if (t.final_score != final_agreement(t.turns)) fail("final_score disagrees with the last valid turn score");
}

} // namespace latprof
