// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/agent_factory.hpp"
#include "latprof/dialogue.hpp"
#include "latprof/domain.hpp"
#include "latprof/elicitation.hpp"
#include "latprof/errors.hpp"
#include "latprof/scripted_backend.hpp"
#include "latprof/validity.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace latprof {

/// Throws ConfigError when the file is missing or not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);
/// Empty string when the file does not exist.
std::string sha256_file(const std::filesystem::path& path);

/// One JSON value per non-blank line. A malformed line throws ParseError naming its line number.
template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<T> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        } catch (const Error& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) {
        out += nlohmann::json(item).dump();
        out += '\n';
    }
    return out;
}

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& items) {
    write_text_file(path, to_jsonl(items));
}

// Enums serialize as their labels.
void to_json(nlohmann::json& j, Region v);
void from_json(const nlohmann::json& j, Region& v);
void to_json(nlohmann::json& j, AgeGroup v);
void from_json(const nlohmann::json& j, AgeGroup& v);
void to_json(nlohmann::json& j, Gender v);
void from_json(const nlohmann::json& j, Gender& v);
void to_json(nlohmann::json& j, Urbanicity v);
void from_json(const nlohmann::json& j, Urbanicity& v);
void to_json(nlohmann::json& j, Education v);
void from_json(const nlohmann::json& j, Education& v);
void to_json(nlohmann::json& j, EndReason v);
void from_json(const nlohmann::json& j, EndReason& v);
void to_json(nlohmann::json& j, ConversationPolicy v);
void from_json(const nlohmann::json& j, ConversationPolicy& v);
void to_json(nlohmann::json& j, JudgePolicy v);
void from_json(const nlohmann::json& j, JudgePolicy& v);

void to_json(nlohmann::json& j, const Topic& v);
void from_json(const nlohmann::json& j, Topic& v);
void to_json(nlohmann::json& j, const DemographicProfile& v);
void from_json(const nlohmann::json& j, DemographicProfile& v);
/// {"level": "implicit", "polarity": "in_favor"}; polarity omitted for none.
void to_json(nlohmann::json& j, const BiasSpec& v);
void from_json(const nlohmann::json& j, BiasSpec& v);
void to_json(nlohmann::json& j, const BiasClauses& v);
void from_json(const nlohmann::json& j, BiasClauses& v);
void to_json(nlohmann::json& j, const GridDefinition& v);
void from_json(const nlohmann::json& j, GridDefinition& v);
void to_json(nlohmann::json& j, const AgentSpec& v);
void from_json(const nlohmann::json& j, AgentSpec& v);
void to_json(nlohmann::json& j, const ProfileRecord& v);
void from_json(const nlohmann::json& j, ProfileRecord& v);
void to_json(nlohmann::json& j, const Turn& v);
void from_json(const nlohmann::json& j, Turn& v);
void to_json(nlohmann::json& j, const TranscriptMetadata& v);
void from_json(const nlohmann::json& j, TranscriptMetadata& v);
void to_json(nlohmann::json& j, const Transcript& v);
void from_json(const nlohmann::json& j, Transcript& v);
void to_json(nlohmann::json& j, const PlannedPair& v);
void from_json(const nlohmann::json& j, PlannedPair& v);
void to_json(nlohmann::json& j, const ScriptedBehavior& v);
void from_json(const nlohmann::json& j, ScriptedBehavior& v);
void to_json(nlohmann::json& j, const ScriptedPatch& v);
void from_json(const nlohmann::json& j, ScriptedPatch& v);
void to_json(nlohmann::json& j, const ScriptedRule& v);
void from_json(const nlohmann::json& j, ScriptedRule& v);
void to_json(nlohmann::json& j, const ScriptedConfig& v);
void to_json(nlohmann::json& j, const AnnotationRecord& v);
void from_json(const nlohmann::json& j, AnnotationRecord& v);
void from_json(const nlohmann::json& j, ScriptedConfig& v);

} // namespace latprof
