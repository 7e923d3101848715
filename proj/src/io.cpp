// SPDX-License-Identifier: Apache-2.0
#include "latprof/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <sstream>

namespace latprof {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    return sha256_hex(read_text_file(path));
}

#define LATPROF_ENUM_JSON(Type, parse_fn)                                                          \
    void to_json(json& j, Type v) { j = std::string(to_string(v)); }                              \
    void from_json(const json& j, Type& v) { v = parse_fn(j.get<std::string>()); }

LATPROF_ENUM_JSON(Region, parse_region)
LATPROF_ENUM_JSON(AgeGroup, parse_age_group)
LATPROF_ENUM_JSON(Gender, parse_gender)
LATPROF_ENUM_JSON(Urbanicity, parse_urbanicity)
LATPROF_ENUM_JSON(Education, parse_education)
LATPROF_ENUM_JSON(EndReason, parse_end_reason)
LATPROF_ENUM_JSON(ConversationPolicy, parse_conversation_policy)
LATPROF_ENUM_JSON(JudgePolicy, parse_judge_policy)

#undef LATPROF_ENUM_JSON

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        v.reset();
        return;
    }
    v = it->template get<T>();
}

template <typename T>
void get_if_present(const json& j, const char* key, T& v) {
    const auto it = j.find(key);
    if (it != j.end() && !it->is_null()) v = it->template get<T>();
}

} // namespace

void to_json(json& j, const Topic& v) {
    j = json{{"id", v.id},
             {"statement", v.statement},
             {"contentiousness", v.contentiousness},
             {"bias_key", v.bias_key},
             {"question_clause", v.question_clause}};
}

void from_json(const json& j, Topic& v) {
    v.id = j.at("id").get<std::string>();
    v.statement = j.at("statement").get<std::string>();
    v.contentiousness = j.at("contentiousness").get<int>();
    v.bias_key = j.value("bias_key", v.id);
    v.question_clause = j.value("question_clause", std::string());
}

void to_json(json& j, const DemographicProfile& v) {
    j = json{{"region", v.region},
             {"age_group", v.age_group},
             {"gender", v.gender},
             {"urbanicity", v.urbanicity},
             {"education", v.education}};
}

void from_json(const json& j, DemographicProfile& v) {
    j.at("region").get_to(v.region);
    j.at("age_group").get_to(v.age_group);
    j.at("gender").get_to(v.gender);
    j.at("urbanicity").get_to(v.urbanicity);
    j.at("education").get_to(v.education);
}

void to_json(json& j, const BiasSpec& v) {
    j = json{{"level", std::string(to_string(v.level()))}};
    if (v.polarity()) j["polarity"] = std::string(to_string(*v.polarity()));
}

void from_json(const json& j, BiasSpec& v) {
    const BiasLevel level = parse_bias_level(j.at("level").get<std::string>());
    std::optional<Polarity> polarity;
    if (j.contains("polarity") && !j["polarity"].is_null())
        polarity = parse_polarity(j["polarity"].get<std::string>());
    v = BiasSpec(level, polarity);
}

void to_json(json& j, const BiasClauses& v) { j = json{{"in_favor", v.in_favor}, {"against", v.against}}; }

void from_json(const json& j, BiasClauses& v) {
    v.in_favor = j.at("in_favor").get<std::string>();
    v.against = j.at("against").get<std::string>();
}

void to_json(json& j, const GridDefinition& v) {
    j = json{{"topics", v.topics},
             {"regions", v.regions},
             {"age_groups", v.age_groups},
             {"genders", v.genders},
             {"urbanicities", v.urbanicities},
             {"educations", v.educations},
             {"bias_variants", v.bias_variants},
             {"implicit_clauses", v.implicit_clauses},
             {"explicit_clauses", v.explicit_clauses}};
}

void from_json(const json& j, GridDefinition& v) {
    // Absent keys keep the published defaults, so a grid file may override only what it needs.
    v = GridDefinition::defaults();
    get_if_present(j, "topics", v.topics);
    get_if_present(j, "regions", v.regions);
    get_if_present(j, "age_groups", v.age_groups);
    get_if_present(j, "genders", v.genders);
    get_if_present(j, "urbanicities", v.urbanicities);
    get_if_present(j, "educations", v.educations);
    get_if_present(j, "bias_variants", v.bias_variants);
    if (const auto it = j.find("implicit_clauses"); it != j.end())
        for (const auto& [k, c] : it->items()) v.implicit_clauses[k] = c.get<BiasClauses>();
    if (const auto it = j.find("explicit_clauses"); it != j.end())
        for (const auto& [k, c] : it->items()) v.explicit_clauses[k] = c.get<BiasClauses>();
}

void to_json(json& j, const AgentSpec& v) {
    j = json{{"agent_id", v.agent_id}, {"topic_id", v.topic_id}, {"demographics", v.demographics}, {"bias", v.bias}};
}

void from_json(const json& j, AgentSpec& v) {
    v.agent_id = j.at("agent_id").get<std::string>();
    v.topic_id = j.at("topic_id").get<std::string>();
    j.at("demographics").get_to(v.demographics);
    j.at("bias").get_to(v.bias);
}

void to_json(json& j, const ProfileRecord& v) {
    j = json{{"agent_id", v.agent_id}, {"topic_id", v.topic_id}};
    put_optional(j, "preference", v.preference);
    put_optional(j, "openness", v.openness);
    j["preference_replies"] = v.preference_replies;
    j["openness_replies"] = v.openness_replies;
    put_optional(j, "invalid_reason", v.invalid_reason);
}

void from_json(const json& j, ProfileRecord& v) {
    v.agent_id = j.at("agent_id").get<std::string>();
    v.topic_id = j.at("topic_id").get<std::string>();
    get_optional(j, "preference", v.preference);
    get_optional(j, "openness", v.openness);
    v.preference_replies = j.value("preference_replies", std::vector<std::string>{});
    v.openness_replies = j.value("openness_replies", std::vector<std::string>{});
    get_optional(j, "invalid_reason", v.invalid_reason);
    if (v.preference && (*v.preference < 1 || *v.preference > 5)) throw ParseError("preference out of range");
    if (v.openness && (*v.openness < 0 || *v.openness > 9)) throw ParseError("openness out of range");
}

void to_json(json& j, const Turn& v) {
    j = json{{"index", v.index}, {"speaker", v.speaker}, {"text", v.text}, {"judge_score", v.judge_score}};
}

void from_json(const json& j, Turn& v) {
    v.index = j.at("index").get<int>();
    v.speaker = j.at("speaker").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.judge_score = j.value("judge_score", kNoScore);
}

void to_json(json& j, const TranscriptMetadata& v) {
    j = json{{"agent_model", v.agent_model},
             {"judge_model", v.judge_model},
             {"started_at", v.started_at},
             {"finished_at", v.finished_at},
             {"calibrated", v.calibrated}};
}

void from_json(const json& j, TranscriptMetadata& v) {
    v.agent_model = j.value("agent_model", std::string());
    v.judge_model = j.value("judge_model", std::string());
    v.started_at = j.value("started_at", std::string());
    v.finished_at = j.value("finished_at", std::string());
    v.calibrated = j.value("calibrated", false);
}

void to_json(json& j, const Transcript& v) {
    j = json{{"conversation_id", v.conversation_id},
             {"opener", v.opener()},
             {"responder", v.responder()},
             {"topic_id", v.topic_id},
             {"seed", v.seed},
             {"end_reason", v.end_reason},
             {"judged", v.judged}};
    put_optional(j, "failure", v.failure);
    put_optional(j, "final_score", v.final_score);
    j["metadata"] = v.metadata;
    j["turns"] = v.turns;
}

void from_json(const json& j, Transcript& v) {
    v.conversation_id = j.at("conversation_id").get<std::string>();
    v.pair = {j.at("opener").get<std::string>(), j.at("responder").get<std::string>()};
    v.topic_id = j.at("topic_id").get<std::string>();
    v.seed = j.value("seed", std::uint64_t{0});
    j.at("end_reason").get_to(v.end_reason);
    v.judged = j.value("judged", false);
    get_optional(j, "failure", v.failure);
    get_optional(j, "final_score", v.final_score);
    if (j.contains("metadata")) j["metadata"].get_to(v.metadata);
    j.at("turns").get_to(v.turns);
}

void to_json(json& j, const PlannedPair& v) {
    j = json{{"opener", v.opener}, {"responder", v.responder}, {"seed", v.seed}};
}

void from_json(const json& j, PlannedPair& v) {
    v.opener = j.at("opener").get<std::string>();
    v.responder = j.at("responder").get<std::string>();
    v.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const ScriptedBehavior& v) {
    j = json{{"preference_answer", v.preference_answer},
             {"openness_answers", v.openness_answers},
             {"conversation", v.conversation},
             {"goodbye_k", v.goodbye_k},
             {"judge_constant", v.judge_constant}};
    put_optional(j, "judge", v.judge);
    put_optional(j, "preference_reply", v.preference_reply);
    put_optional(j, "openness_reply", v.openness_reply);
}

void from_json(const json& j, ScriptedBehavior& v) {
    v = ScriptedBehavior{};
    ScriptedPatch p;
    from_json(j, p);
    p.apply_to(v);
}

void to_json(json& j, const ScriptedPatch& v) {
    j = json::object();
    if (v.preference_answer) j["preference_answer"] = *v.preference_answer;
    if (v.openness_answers) j["openness_answers"] = *v.openness_answers;
    if (v.conversation) j["conversation"] = *v.conversation;
    if (v.goodbye_k) j["goodbye_k"] = *v.goodbye_k;
    if (v.judge) j["judge"] = *v.judge;
    if (v.judge_constant) j["judge_constant"] = *v.judge_constant;
    if (v.preference_reply) j["preference_reply"] = *v.preference_reply;
    if (v.openness_reply) j["openness_reply"] = *v.openness_reply;
}

void from_json(const json& j, ScriptedPatch& v) {
    get_optional(j, "preference_answer", v.preference_answer);
    get_optional(j, "conversation", v.conversation);
    get_optional(j, "goodbye_k", v.goodbye_k);
    get_optional(j, "judge", v.judge);
    get_optional(j, "judge_constant", v.judge_constant);
    get_optional(j, "preference_reply", v.preference_reply);
    get_optional(j, "openness_reply", v.openness_reply);
    get_optional(j, "openness_answers", v.openness_answers);
    if (j.contains("openness") && !v.openness_answers) {
        // Shorthand: openness n answers Yes to the first n questions.
        const int n = j["openness"].get<int>();
        if (n < 0 || n > 9) throw ConfigError("scripted openness must be in [0,9]");
        std::array<bool, 9> a{};
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = true;
        v.openness_answers = a;
    }
}

void to_json(json& j, const ScriptedRule& v) {
    j = v.patch;
    j["system_contains"] = v.system_contains;
}

void from_json(const json& j, ScriptedRule& v) {
    v.system_contains = j.at("system_contains").get<std::string>();
    from_json(j, v.patch);
}

void to_json(json& j, const ScriptedConfig& v) { j = json{{"defaults", v.defaults}, {"rules", v.rules}}; }

void from_json(const json& j, ScriptedConfig& v) {
    v = ScriptedConfig{};
    if (j.contains("defaults")) j["defaults"].get_to(v.defaults);
    if (j.contains("rules")) j["rules"].get_to(v.rules);
}

} // namespace latprof
