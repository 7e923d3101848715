// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/agent_factory.hpp"
#include "latprof/analysis.hpp"
#include "latprof/gateway.hpp"
#include "latprof/scripted_backend.hpp"
#include "latprof/validity.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace latprof {

enum class BackendKind { Http, Scripted };
std::string_view to_string(BackendKind b);
BackendKind parse_backend_kind(std::string_view s);

/// Everything a run depends on. Loaded from a JSON config, then overridden by CLI flags.
struct RunConfig {
    std::uint64_t seed = 0;
    /// Topic ids to run; empty means every topic in the grid.
    std::vector<std::string> topics;
    GridDefinition grid = GridDefinition::defaults();
    BackendKind backend = BackendKind::Http;
    std::string agent_endpoint;
    std::string judge_endpoint;
    std::string agent_model;
    std::string judge_model;
    /// Permits the judge to be the same model as the agents.
    bool allow_same_judge_model = false;
    int pairs_per_cell = 3;
    int max_turns = 5;
    double diversity_threshold = kDefaultDiversityThreshold;
    Sampling conversation_sampling{0.7, 256};
    Sampling elicitation_sampling{0.0, 8};
    Sampling judge_sampling{0.0, 8};
    int max_attempts = 3;
    int max_in_flight = 8;
    int workers = 8;
    bool reverse_code_last_item = false;
    std::vector<std::string> openness_questions;
    std::string judge_system_prompt;
    std::optional<std::filesystem::path> calibration_path;
    std::optional<std::filesystem::path> annotations_path;
    ScriptedConfig scripted;
    BleuConfig bleu;
    AnalysisOptions analysis;
    std::filesystem::path out = "run";

    std::vector<std::string> selected_topics() const;
    /// Throws ConfigError on out-of-range values, unknown topics, missing endpoints for the
    /// http backend, or judge == agent model without allow_same_judge_model.
    void validate() const;
};

/// Relative paths in the config resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

enum class Stage { Generate, Elicit, Pair, Converse, Judge, Validate, Analyze, Report };
inline constexpr std::array kAllStages{Stage::Generate, Stage::Elicit,   Stage::Pair,    Stage::Converse,
                                       Stage::Judge,    Stage::Validate, Stage::Analyze, Stage::Report};
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

enum class StageStatus { Ran, Skipped };

struct StageOutcome {
    Stage stage = Stage::Generate;
    StageStatus status = StageStatus::Ran;
};

/// Runs stages over one output directory and keeps manifest.json in it. A completed stage
/// whose inputs and outputs still match the manifest is skipped. Any recorded artifact
/// that changed on disk raises IntegrityError. Missing predecessors raise StageError.
class Pipeline {
public:
    explicit Pipeline(RunConfig config);
    /// Test seam: use these backends instead of building them from the config.
    Pipeline(RunConfig config, std::shared_ptr<ChatBackend> agent_backend, std::shared_ptr<ChatBackend> judge_backend);

    std::vector<StageOutcome> run_all();
    StageOutcome run_stage(Stage stage);
    /// Writes worksheets/<conversation_id>.jsonl for every judged (or else unjudged) transcript.
    std::size_t write_worksheets();

    const RunConfig& config() const noexcept { return config_; }
    std::filesystem::path manifest_path() const { return config_.out / "manifest.json"; }
    nlohmann::json manifest() const;

private:
    RunConfig config_;
    std::shared_ptr<ChatBackend> agent_backend_;
    std::shared_ptr<ChatBackend> judge_backend_;
};

/// Files read and written by each stage, relative to the output directory.
std::vector<std::string> stage_inputs(Stage s);
std::vector<std::string> stage_outputs(Stage s);

/// Recomputes every checksum listed in the manifest. Returns the paths that differ or are missing.
std::vector<std::string> verify_manifest(const std::filesystem::path& out_dir);

} // namespace latprof
