// SPDX-License-Identifier: Apache-2.0
#include "latprof/pipeline.hpp"

#include "latprof/dialogue.hpp"
#include "latprof/elicitation.hpp"
#include "latprof/errors.hpp"
#include "latprof/http_backend.hpp"
#include "latprof/io.hpp"
#include "latprof/parallel.hpp"
#include "latprof/prompts.hpp"
#include "latprof/rng.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace latprof {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(BackendKind b) { return b == BackendKind::Http ? "http" : "scripted"; }

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "http") return BackendKind::Http;
    if (s == "scripted") return BackendKind::Scripted;
    throw ConfigError("unknown backend: " + std::string(s));
}

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::Generate: return "generate";
    case Stage::Elicit: return "elicit";
    case Stage::Pair: return "pair";
    case Stage::Converse: return "converse";
    case Stage::Judge: return "judge";
    case Stage::Validate: return "validate";
    case Stage::Analyze: return "analyze";
    case Stage::Report: return "report";
    }
    return "?";
}

Stage parse_stage(std::string_view s) {
    for (const auto st : kAllStages)
        if (to_string(st) == s) return st;
    throw ConfigError("unknown stage: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Config

std::vector<std::string> RunConfig::selected_topics() const {
    if (!topics.empty()) return topics;
    std::vector<std::string> out;
    for (const auto& t : grid.topics) out.push_back(t.id);
    return out;
}

void RunConfig::validate() const {
    grid.validate();
    for (const auto& id : selected_topics()) grid.topic(id);
    if (pairs_per_cell < 1) throw ConfigError("pairs_per_cell must be >= 1");
    if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
    if (!(diversity_threshold >= 0.0)) throw ConfigError("diversity_threshold must be >= 0");
    if (max_attempts < 1 || max_in_flight < 1 || workers < 1)
        throw ConfigError("max_attempts, max_in_flight and workers must be >= 1");
    for (const Sampling* s : {&conversation_sampling, &elicitation_sampling, &judge_sampling})
        if (s->temperature < 0.0 || s->max_tokens < 1) throw ConfigError("invalid sampling parameters");
    if (!openness_questions.empty() && openness_questions.size() != 9)
        throw ConfigError("openness battery must have exactly 9 questions");
    if (bleu.max_n < 1) throw ConfigError("bleu.max_n must be >= 1");
    if (analysis.bootstrap_draw < 1 || analysis.bootstrap_reps < 1)
        throw ConfigError("bootstrap draw and reps must be >= 1");
    if (backend == BackendKind::Http) {
        if (agent_endpoint.empty()) throw ConfigError("--agent-endpoint is required for the http backend");
        if (agent_model.empty() || judge_model.empty())
            throw ConfigError("--agent-model and --judge-model are required for the http backend");
    }
    if (agent_model == judge_model && !allow_same_judge_model)
        throw ConfigError("judge model equals agent model (" + agent_model +
                          "); set allow_same_judge_model to override");
}

namespace {

Sampling sampling_from(const json& j, Sampling fallback) {
    fallback.temperature = j.value("temperature", fallback.temperature);
    fallback.max_tokens = j.value("max_tokens", fallback.max_tokens);
    return fallback;
}

json sampling_json(const Sampling& s) { return {{"temperature", s.temperature}, {"max_tokens", s.max_tokens}}; }

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string effective_judge_prompt(const RunConfig& c) {
    return c.judge_system_prompt.empty() ? std::string(kJudgeSystemPrompt) : c.judge_system_prompt;
}

std::vector<std::string> effective_battery(const RunConfig& c) {
    return c.openness_questions.empty() ? OpennessBattery::defaults().questions : c.openness_questions;
}

} // namespace

RunConfig load_run_config(const fs::path& path) {
    const json j = read_json_file(path);
    const fs::path base = path.parent_path();
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.topics = j.value("topics", c.topics);
        if (j.contains("grid_file")) c.grid = load_grid(resolve(base, j["grid_file"].get<std::string>()));
        if (j.contains("grid")) c.grid = j["grid"].get<GridDefinition>();
        if (j.contains("backend")) c.backend = parse_backend_kind(j["backend"].get<std::string>());
        c.agent_endpoint = j.value("agent_endpoint", c.agent_endpoint);
        c.judge_endpoint = j.value("judge_endpoint", c.judge_endpoint);
        c.agent_model = j.value("agent_model", c.agent_model);
        c.judge_model = j.value("judge_model", c.judge_model);
        c.allow_same_judge_model = j.value("allow_same_judge_model", c.allow_same_judge_model);
        c.pairs_per_cell = j.value("pairs_per_cell", c.pairs_per_cell);
        c.max_turns = j.value("max_turns", c.max_turns);
        c.diversity_threshold = j.value("diversity_threshold", c.diversity_threshold);
        if (j.contains("sampling")) {
            const auto& s = j["sampling"];
            if (s.contains("conversation")) c.conversation_sampling = sampling_from(s["conversation"], c.conversation_sampling);
            if (s.contains("elicitation")) c.elicitation_sampling = sampling_from(s["elicitation"], c.elicitation_sampling);
            if (s.contains("judge")) c.judge_sampling = sampling_from(s["judge"], c.judge_sampling);
        }
        c.max_attempts = j.value("max_attempts", c.max_attempts);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.workers = j.value("workers", c.workers);
        c.reverse_code_last_item = j.value("reverse_code_last_item", c.reverse_code_last_item);
        if (j.contains("openness_battery_file"))
            c.openness_questions =
                OpennessBattery::load(resolve(base, j["openness_battery_file"].get<std::string>())).questions;
        c.openness_questions = j.value("openness_questions", c.openness_questions);
        c.judge_system_prompt = j.value("judge_system_prompt", c.judge_system_prompt);
        if (j.contains("calibration_file")) c.calibration_path = resolve(base, j["calibration_file"].get<std::string>());
        if (j.contains("annotations_file")) c.annotations_path = resolve(base, j["annotations_file"].get<std::string>());
        if (j.contains("scripted")) c.scripted = j["scripted"].get<ScriptedConfig>();
        if (j.contains("bleu")) {
            c.bleu.max_n = j["bleu"].value("max_n", c.bleu.max_n);
            c.bleu.epsilon = j["bleu"].value("epsilon", c.bleu.epsilon);
        }
        if (j.contains("analysis")) {
            const auto& a = j["analysis"];
            c.analysis.bootstrap_draw = a.value("bootstrap_draw", c.analysis.bootstrap_draw);
            c.analysis.bootstrap_reps = a.value("bootstrap_reps", c.analysis.bootstrap_reps);
            c.analysis.sigmoid_k = a.value("sigmoid_k", c.analysis.sigmoid_k);
        }
        if (j.contains("out")) c.out = resolve(base, j["out"].get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return c;
}

json config_to_json(const RunConfig& c) {
    json j{{"seed", c.seed},
           {"topics", c.selected_topics()},
           {"grid", c.grid},
           {"backend", std::string(to_string(c.backend))},
           {"agent_endpoint", c.agent_endpoint},
           {"judge_endpoint", c.judge_endpoint},
           {"agent_model", c.agent_model},
           {"judge_model", c.judge_model},
           {"allow_same_judge_model", c.allow_same_judge_model},
           {"pairs_per_cell", c.pairs_per_cell},
           {"max_turns", c.max_turns},
           {"diversity_threshold", c.diversity_threshold},
           {"sampling",
            {{"conversation", sampling_json(c.conversation_sampling)},
             {"elicitation", sampling_json(c.elicitation_sampling)},
             {"judge", sampling_json(c.judge_sampling)}}},
           {"max_attempts", c.max_attempts},
           {"max_in_flight", c.max_in_flight},
           {"workers", c.workers},
           {"reverse_code_last_item", c.reverse_code_last_item},
           {"openness_questions", effective_battery(c)},
           {"judge_system_prompt", effective_judge_prompt(c)},
           {"scripted", c.scripted},
           {"bleu", {{"max_n", c.bleu.max_n}, {"epsilon", c.bleu.epsilon}}},
           {"analysis",
            {{"bootstrap_draw", c.analysis.bootstrap_draw},
             {"bootstrap_reps", c.analysis.bootstrap_reps},
             {"sigmoid_k", c.analysis.sigmoid_k}}}};
    if (c.calibration_path) j["calibration_file"] = fs::absolute(*c.calibration_path).string();
    if (c.annotations_path) j["annotations_file"] = fs::absolute(*c.annotations_path).string();
    return j;
}

// ---------------------------------------------------------------------------
// Stage files

std::vector<std::string> stage_inputs(Stage s) {
    switch (s) {
    case Stage::Generate: return {};
    case Stage::Elicit: return {"grid.json", "agents.jsonl"};
    case Stage::Pair: return {"agents.jsonl", "profiles.jsonl"};
    case Stage::Converse: return {"grid.json", "agents.jsonl", "pairs.jsonl"};
    case Stage::Judge: return {"transcripts.jsonl"};
    case Stage::Validate: return {"judged_transcripts.jsonl"};
    case Stage::Analyze: return {"grid.json", "agents.jsonl", "profiles.jsonl", "kept_transcripts.jsonl"};
    case Stage::Report: {
        std::vector<std::string> out;
        for (const auto& n : analysis_table_names()) out.push_back("analysis/" + n + ".tsv");
        return out;
    }
    }
    return {};
}

namespace {

const std::vector<std::string>& report_table_names() {
    static const std::vector<std::string> names{
        "fig_a_gap_agreement",  "fig_b_distributions", "fig_b_suppression",     "fig_c_anchor_agreement",
        "fig_c_anchor_deltas",  "fig_d_contentiousness", "fig_e_openness",      "fig_e_baseline_deltas",
        "fig_e_summary",        "fig_f_verdicts",       "fig_f_comparisons_appendix"};
    return names;
}

} // namespace

std::vector<std::string> stage_outputs(Stage s) {
    switch (s) {
    case Stage::Generate: return {"grid.json", "agents.jsonl"};
    case Stage::Elicit: return {"profiles.jsonl"};
    case Stage::Pair: return {"pairs.jsonl"};
    case Stage::Converse: return {"transcripts.jsonl"};
    case Stage::Judge: return {"judged_transcripts.jsonl"};
    case Stage::Validate:
        return {"diversity.tsv", "kept_transcripts.jsonl", "removed_conversations.tsv", "annotation_summary.tsv"};
    case Stage::Analyze: return stage_inputs(Stage::Report);
    case Stage::Report: {
        std::vector<std::string> out;
        for (const auto& n : report_table_names()) out.push_back("report/" + n + ".tsv");
        out.push_back("report/summary.md");
        return out;
    }
    }
    return {};
}

std::vector<std::string> verify_manifest(const fs::path& out_dir) {
    const json m = read_json_file(out_dir / "manifest.json");
    std::vector<std::string> bad;
    const json files = m.value("files", json::object());
    for (const auto& [rel, sha] : files.items())
        if (sha256_file(out_dir / rel) != sha.get<std::string>()) bad.push_back(rel);
    return bad;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct PairRecord {
    std::string conversation_id;
    std::string topic_id;
    std::string cell;
    PlannedPair pair;
};

void to_json(json& j, const PairRecord& r) {
    j = json{{"conversation_id", r.conversation_id},
             {"topic_id", r.topic_id},
             {"cell", r.cell},
             {"opener", r.pair.opener},
             {"responder", r.pair.responder},
             {"seed", r.pair.seed}};
}

void from_json(const json& j, PairRecord& r) {
    r.conversation_id = j.at("conversation_id").get<std::string>();
    r.topic_id = j.at("topic_id").get<std::string>();
    r.cell = j.value("cell", std::string());
    from_json(j, r.pair);
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string calibration_sha(const RunConfig& c) { return c.calibration_path ? sha256_file(*c.calibration_path) : ""; }

/// Settings a stage's outputs depend on. A change re-runs the stage and everything after it.
json stage_settings(const RunConfig& c, Stage s) {
    switch (s) {
    case Stage::Generate: return {{"seed", c.seed}, {"topics", c.selected_topics()}, {"grid", c.grid}};
    case Stage::Elicit:
        return {{"backend", to_string(c.backend)},      {"agent_endpoint", c.agent_endpoint},
                {"agent_model", c.agent_model},         {"sampling", sampling_json(c.elicitation_sampling)},
                {"battery", effective_battery(c)},      {"reverse_code_last_item", c.reverse_code_last_item},
                {"scripted", c.scripted}};
    case Stage::Pair: return {{"seed", c.seed}, {"pairs_per_cell", c.pairs_per_cell}};
    case Stage::Converse:
        return {{"backend", to_string(c.backend)}, {"agent_endpoint", c.agent_endpoint},
                {"agent_model", c.agent_model},    {"sampling", sampling_json(c.conversation_sampling)},
                {"max_turns", c.max_turns},        {"scripted", c.scripted}};
    case Stage::Judge:
        return {{"backend", to_string(c.backend)},
                {"judge_endpoint", c.judge_endpoint},
                {"judge_model", c.judge_model},
                {"sampling", sampling_json(c.judge_sampling)},
                {"judge_prompt_sha256", sha256_hex(effective_judge_prompt(c))},
                {"calibration_sha256", calibration_sha(c)},
                {"scripted", c.scripted}};
    case Stage::Validate:
        return {{"diversity_threshold", c.diversity_threshold},
                {"bleu", {{"max_n", c.bleu.max_n}, {"epsilon", c.bleu.epsilon}}},
                {"annotations_sha256", c.annotations_path ? sha256_file(*c.annotations_path) : ""}};
    case Stage::Analyze:
        return {{"seed", c.seed},
                {"bootstrap_draw", c.analysis.bootstrap_draw},
                {"bootstrap_reps", c.analysis.bootstrap_reps},
                {"sigmoid_k", c.analysis.sigmoid_k}};
    case Stage::Report: return json::object();
    }
    return json::object();
}

std::size_t stage_position(Stage s) { return static_cast<std::size_t>(s); }

std::shared_ptr<ChatBackend> make_backend(const RunConfig& c, const std::string& endpoint) {
    if (c.backend == BackendKind::Scripted) return std::make_shared<ScriptedBackend>(c.scripted, effective_battery(c));
    return std::make_shared<HttpChatBackend>(HttpChatBackend::options_from_env(endpoint));
}

GatewayOptions gateway_options(const RunConfig& c) {
    GatewayOptions o;
    o.max_attempts = c.max_attempts;
    o.max_in_flight = c.max_in_flight;
    if (c.backend == BackendKind::Http) o.backoff = std::chrono::milliseconds(500);
    return o;
}

std::string summary_markdown(const TableSet& report) {
    const Table& v = report.at("fig_f_verdicts");
    std::string md = "# Consistency test verdicts\n\n| Test | Name | Verdict | Statistics | Comparisons |\n"
                     "|---|---|---|---|---|\n";
    for (std::size_t r = 0; r < v.rows.size(); ++r)
        md += "| " + v.cell(r, "test_id") + " | " + v.cell(r, "name") + " | " + v.cell(r, "mark") + " " +
              v.cell(r, "verdict") + (v.cell(r, "missing_cell") == "-" ? "" : " (missing: " + v.cell(r, "missing_cell") + ")") +
              " | " + v.cell(r, "statistics") + " | " + v.cell(r, "n_comparisons") + " |\n";
    md += "\nTest 2 passes when the KS test does not reject at p < 0.01. A pass means no detectable\n"
          "difference between gap-4 scores and reflected gap-0 scores; it does not establish equivalence.\n\n"
          "Tests 3, 4 and 6 use Bonferroni-corrected thresholds. Every per-comparison p-value is listed in\n"
          "fig_f_comparisons_appendix.tsv.\n";
    const Table& e = report.at("fig_e_summary");
    if (!e.rows.empty())
        md += "\nOpenness pairings above the (0,0) baseline at preference pair (1,5): " + e.cell(0, "count") + "\n";
    return md;
}

} // namespace

Pipeline::Pipeline(RunConfig config) : Pipeline(std::move(config), nullptr, nullptr) {}

Pipeline::Pipeline(RunConfig config, std::shared_ptr<ChatBackend> agent_backend,
                   std::shared_ptr<ChatBackend> judge_backend)
    : config_(std::move(config)), agent_backend_(std::move(agent_backend)), judge_backend_(std::move(judge_backend)) {
    if (config_.backend == BackendKind::Scripted) {
        if (config_.agent_model.empty()) config_.agent_model = "scripted-agent";
        if (config_.judge_model.empty()) config_.judge_model = "scripted-judge";
    }
    if (config_.judge_endpoint.empty()) config_.judge_endpoint = config_.agent_endpoint;
    config_.validate();
    if (!agent_backend_) agent_backend_ = make_backend(config_, config_.agent_endpoint);
    if (!judge_backend_) judge_backend_ = make_backend(config_, config_.judge_endpoint);
}

json Pipeline::manifest() const {
    const auto p = manifest_path();
    return fs::exists(p) ? read_json_file(p) : json::object();
}

namespace {

class StageRunner {
public:
    StageRunner(const RunConfig& config, std::shared_ptr<ChatBackend> agent, std::shared_ptr<ChatBackend> judge)
        : c_(config), agent_gateway_(std::move(agent), gateway_options(config)),
          judge_gateway_(std::move(judge), gateway_options(config)) {}

    fs::path at(const std::string& rel) const { return c_.out / rel; }

    json execute(Stage s) {
        switch (s) {
        case Stage::Generate: return generate();
        case Stage::Elicit: return elicit();
        case Stage::Pair: return pair();
        case Stage::Converse: return converse();
        case Stage::Judge: return judge();
        case Stage::Validate: return validate();
        case Stage::Analyze: return analyze();
        case Stage::Report: return report();
        }
        return {};
    }

private:
    json generate() {
        GridDefinition grid = c_.grid;
        save_grid(grid, at("grid.json"));
        std::vector<AgentSpec> agents;
        for (const auto& id : c_.selected_topics()) {
            auto topic_agents = enumerate_agents(grid, grid.topic(id));
            agents.insert(agents.end(), topic_agents.begin(), topic_agents.end());
        }
        write_jsonl(at("agents.jsonl"), agents);
        return {{"agents", agents.size()}, {"topics", c_.selected_topics().size()}};
    }

    json elicit() {
        const auto grid = load_grid(at("grid.json"));
        const auto agents = read_jsonl<AgentSpec>(at("agents.jsonl"));
        OpennessBattery battery;
        battery.questions = effective_battery(c_);
        ElicitationOptions opts;
        opts.model_id = c_.agent_model;
        opts.sampling = c_.elicitation_sampling;
        opts.reverse_code_last_item = c_.reverse_code_last_item;
        opts.workers = c_.workers;
        const auto profiles = elicit_all(grid, agents, battery, agent_gateway_, opts);
        write_jsonl(at("profiles.jsonl"), profiles);
        std::size_t valid = 0;
        for (const auto& p : profiles) valid += p.valid() ? 1 : 0;
        return {{"agents", profiles.size()}, {"valid", valid}, {"invalid", profiles.size() - valid}};
    }

    json pair() {
        const auto agents = read_jsonl<AgentSpec>(at("agents.jsonl"));
        const auto profiles = read_jsonl<ProfileRecord>(at("profiles.jsonl"));
        std::vector<PairRecord> records;
        std::size_t skipped = 0;
        for (const auto& topic : c_.selected_topics()) {
            std::vector<AgentSpec> topic_agents;
            for (const auto& a : agents)
                if (a.topic_id == topic) topic_agents.push_back(a);
            const auto plan =
                plan_pairs(join_profiles(topic_agents, profiles), c_.pairs_per_cell, derive_seed(c_.seed, "pair/" + topic));
            skipped += plan.skipped_cells.size();
            std::size_t k = 0;
            for (const auto& [key, pairs] : plan.cells)
                for (const auto& p : pairs) {
                    char id[32];
                    std::snprintf(id, sizeof id, "-c%05zu", k++);
                    records.push_back({topic + id, topic, key.label(), p});
                }
        }
        write_jsonl(at("pairs.jsonl"), records);
        return {{"pairs", records.size()}, {"skipped_cells", skipped}};
    }

    json converse() {
        const auto grid = load_grid(at("grid.json"));
        const auto agents = read_jsonl<AgentSpec>(at("agents.jsonl"));
        const auto pairs = read_jsonl<PairRecord>(at("pairs.jsonl"));
        std::unordered_map<std::string, const AgentSpec*> by_id;
        for (const auto& a : agents) by_id[a.agent_id] = &a;
        const auto spec = [&](const std::string& id) -> const AgentSpec& {
            const auto it = by_id.find(id);
            if (it == by_id.end()) throw StageError("pairs.jsonl references unknown agent " + id);
            return *it->second;
        };
        ConversationOptions opts;
        opts.max_turns_per_agent = c_.max_turns;
        opts.model_id = c_.agent_model;
        opts.sampling = c_.conversation_sampling;
        std::vector<Transcript> transcripts(pairs.size());
        parallel_for(pairs.size(), c_.workers, [&](std::size_t i) {
            const auto& r = pairs[i];
            transcripts[i] = run_conversation(grid, spec(r.pair.opener), spec(r.pair.responder), grid.topic(r.topic_id),
                                              agent_gateway_, opts, r.pair.seed);
            transcripts[i].conversation_id = r.conversation_id;
        });
        std::map<std::string, std::size_t> reasons;
        for (const auto& t : transcripts) ++reasons[std::string(to_string(t.end_reason))];
        if (!transcripts.empty() && reasons["failure"] == transcripts.size())
            throw StageError("every conversation failed; is the agent endpoint reachable?");
        write_jsonl(at("transcripts.jsonl"), transcripts);
        return {{"conversations", transcripts.size()}, {"end_reasons", reasons}};
    }

    json judge() {
        auto transcripts = read_jsonl<Transcript>(at("transcripts.jsonl"));
        JudgeOptions opts;
        opts.model_id = c_.judge_model;
        opts.sampling = c_.judge_sampling;
        opts.system_prompt = effective_judge_prompt(c_);
        if (c_.calibration_path) opts.calibration = load_calibration(*c_.calibration_path);
        parallel_for(transcripts.size(), c_.workers, [&](std::size_t i) {
            transcripts[i] = judge_transcript(std::move(transcripts[i]), judge_gateway_, opts);
        });
        std::size_t judged = 0, scored = 0;
        for (const auto& t : transcripts) {
            judged += t.judged ? 1 : 0;
            scored += t.final_score ? 1 : 0;
        }
        write_jsonl(at("judged_transcripts.jsonl"), transcripts);
        return {{"transcripts", transcripts.size()}, {"judged", judged}, {"with_final_score", scored},
                {"calibrated", !opts.calibration.empty()}};
    }

    json validate() {
        const auto judged = read_jsonl<Transcript>(at("judged_transcripts.jsonl"));
        std::vector<Transcript> complete;
        std::string removed = "conversation_id\treason\n";
        for (const auto& t : judged) {
            if (t.partial())
                removed += t.conversation_id + "\tbackend_failure\n";
            else
                complete.push_back(t);
        }
        const auto scores = all_agent_diversity(complete, c_.bleu, c_.workers);
        const auto filtered = filter_by_diversity(complete, scores, c_.diversity_threshold);
        for (const auto& t : filtered.removed) removed += t.conversation_id + "\tlow_diversity\n";
        write_text_file(at("diversity.tsv"), diversity_tsv(scores, c_.diversity_threshold));
        write_jsonl(at("kept_transcripts.jsonl"), filtered.kept);
        write_text_file(at("removed_conversations.tsv"), removed);

        Table ann{{"dimension", "turn_index", "n", "mean", "ci_low", "ci_high"}, {}};
        if (c_.annotations_path)
            for (const auto& s : summarize_annotations(load_annotations(*c_.annotations_path),
                                                       derive_seed(c_.seed, "annotations")))
                ann.add({std::string(to_string(s.dimension)), std::to_string(s.turn_index), std::to_string(s.n),
                         format_number(s.mean), format_number(s.ci_low), format_number(s.ci_high)});
        write_text_file(at("annotation_summary.tsv"), ann.to_tsv());
        return {{"kept", filtered.kept.size()},
                {"removed_low_diversity", filtered.removed.size()},
                {"removed_agents", filtered.removed_agents.size()},
                {"excluded_partial", judged.size() - complete.size()}};
    }

    json analyze() {
        const auto grid = load_grid(at("grid.json"));
        const auto agents = read_jsonl<AgentSpec>(at("agents.jsonl"));
        const auto profiles = read_jsonl<ProfileRecord>(at("profiles.jsonl"));
        const auto kept = read_jsonl<Transcript>(at("kept_transcripts.jsonl"));
        const auto data = join_scored_pairs(kept, join_profiles(agents, profiles), grid);
        AnalysisOptions opts = c_.analysis;
        opts.seed = derive_seed(c_.seed, "analysis");
        const auto tables = latprof::analyze(data, opts);
        for (const auto& [name, table] : tables) write_text_file(at("analysis/" + name + ".tsv"), table.to_tsv());
        return {{"scored_pairs", data.size()}};
    }

    json report() {
        TableSet analysis;
        for (const auto& name : analysis_table_names()) {
            const auto p = at("analysis/" + name + ".tsv");
            if (!fs::exists(p)) throw StageError("missing analysis table: " + name);
            analysis[name] = Table::from_tsv(read_text_file(p));
        }
        const auto report = build_report(analysis);
        for (const auto& [name, table] : report) write_text_file(at("report/" + name + ".tsv"), table.to_tsv());
        write_text_file(at("report/summary.md"), summary_markdown(report));
        return {{"tables", report.size()}};
    }

    const RunConfig& c_;
    Gateway agent_gateway_;
    Gateway judge_gateway_;
};

void save_manifest(const fs::path& path, json& m) {
    bool complete = true;
    for (const auto s : kAllStages) {
        const auto& st = m["stages"];
        const std::string name(to_string(s));
        if (!st.contains(name) || st[name].value("status", "") != "complete") complete = false;
    }
    m["status"] = complete ? "complete" : "partial";
    m["updated_at"] = utc_now();
    write_text_file(path, m.dump(2) + "\n");
}

void refresh_header(json& m, const RunConfig& c) {
    if (!m.contains("run_id")) {
        m["run_id"] = sha256_hex(config_to_json(c).dump() + utc_now()).substr(0, 16);
        m["created_at"] = utc_now();
    }
    if (m.contains("seed") && m["seed"].get<std::uint64_t>() != c.seed && m.contains("stages") && !m["stages"].empty())
        throw IntegrityError("seed " + std::to_string(c.seed) + " differs from the seed recorded in the manifest (" +
                             std::to_string(m["seed"].get<std::uint64_t>()) + "); use a fresh --out");
    m["seed"] = c.seed;
    m["topics"] = c.selected_topics();
    m["backend"] = to_string(c.backend);
    m["endpoints"] = {{"agent", c.agent_endpoint}, {"judge", c.judge_endpoint}};
    m["models"] = {{"agent", c.agent_model}, {"judge", c.judge_model}};
    m["pairs_per_cell"] = c.pairs_per_cell;
    m["max_turns"] = c.max_turns;
    m["diversity_threshold"] = c.diversity_threshold;
    m["sampling"] = {{"conversation", sampling_json(c.conversation_sampling)},
                     {"elicitation", sampling_json(c.elicitation_sampling)},
                     {"judge", sampling_json(c.judge_sampling)}};
    m["judge_prompt_sha256"] = sha256_hex(effective_judge_prompt(c));
    m["calibrated"] = c.calibration_path.has_value();
    m["bleu"] = {{"max_n", c.bleu.max_n}, {"epsilon", c.bleu.epsilon}};
    if (!m.contains("stages")) m["stages"] = json::object();
    if (!m.contains("files")) m["files"] = json::object();
}

} // namespace

StageOutcome Pipeline::run_stage(Stage stage) {
    const std::string name(to_string(stage));
    fs::create_directories(config_.out);
    json m = manifest();
    refresh_header(m, config_);
    write_text_file(config_.out / "config.json", config_to_json(config_).dump(2) + "\n");
    m["files"]["config.json"] = sha256_file(config_.out / "config.json");

    // Predecessors must be complete and every artifact they recorded must be unchanged.
    for (const auto prev : kAllStages) {
        if (stage_position(prev) >= stage_position(stage)) break;
        const std::string pname(to_string(prev));
        if (!m["stages"].contains(pname) || m["stages"][pname].value("status", "") != "complete")
            throw StageError("stage " + pname + " has not completed; run it before " + name);
        for (const auto& rel : stage_outputs(prev)) {
            const std::string recorded = m["files"].value(rel, "");
            const std::string current = sha256_file(config_.out / rel);
            if (current.empty()) throw IntegrityError(rel + " is missing but recorded in the manifest");
            if (current != recorded) throw IntegrityError(rel + " does not match its manifest checksum");
        }
    }

    json inputs = json::object();
    for (const auto& rel : stage_inputs(stage)) inputs[rel] = sha256_file(config_.out / rel);
    const std::string settings = sha256_hex(stage_settings(config_, stage).dump());

    if (m["stages"].contains(name)) {
        const json& rec = m["stages"][name];
        if (rec.value("status", "") == "complete" && rec.value("settings_sha256", "") == settings &&
            rec.value("inputs", json::object()) == inputs) {
            bool all_present = true;
            for (const auto& rel : stage_outputs(stage)) {
                const std::string current = sha256_file(config_.out / rel);
                if (current.empty()) {
                    all_present = false;
                    continue;
                }
                if (current != rec["outputs"].value(rel, ""))
                    throw IntegrityError(rel + " does not match its manifest checksum");
            }
            if (all_present) {
                spdlog::info("stage {} up to date, skipped", name);
                save_manifest(manifest_path(), m);
                return {stage, StageStatus::Skipped};
            }
        }
    }

    // Later stages are invalidated by a re-run.
    for (const auto later : kAllStages)
        if (stage_position(later) > stage_position(stage)) m["stages"].erase(std::string(to_string(later)));
    m["stages"][name] = {{"status", "running"}, {"started_at", utc_now()}};
    save_manifest(manifest_path(), m);

    spdlog::info("stage {} running", name);
    const auto start = std::chrono::steady_clock::now();
    json counts;
    try {
        StageRunner runner(config_, agent_backend_, judge_backend_);
        counts = runner.execute(stage);
    } catch (const std::exception& e) {
        m["stages"][name] = {{"status", "failed"}, {"error", e.what()}, {"failed_at", utc_now()}};
        save_manifest(manifest_path(), m);
        throw;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json outputs = json::object();
    for (const auto& rel : stage_outputs(stage)) {
        outputs[rel] = sha256_file(config_.out / rel);
        m["files"][rel] = outputs[rel];
    }
    m["stages"][name] = {{"status", "complete"}, {"settings_sha256", settings}, {"inputs", inputs},
                         {"outputs", outputs}, {"wall_seconds", wall},      {"counts", counts},
                         {"finished_at", utc_now()}};
    save_manifest(manifest_path(), m);
    return {stage, StageStatus::Ran};
}

std::vector<StageOutcome> Pipeline::run_all() {
    std::vector<StageOutcome> out;
    for (const auto s : kAllStages) out.push_back(run_stage(s));
    return out;
}

std::size_t Pipeline::write_worksheets() {
    json m = manifest();
    fs::path source = config_.out / "judged_transcripts.jsonl";
    if (!fs::exists(source)) source = config_.out / "transcripts.jsonl";
    if (!fs::exists(source)) throw StageError("no transcripts to build worksheets from; run converse first");
    const std::string rel_source = fs::relative(source, config_.out).string();
    if (m.contains("files") && m["files"].contains(rel_source) &&
        m["files"][rel_source].get<std::string>() != sha256_file(source))
        throw IntegrityError(rel_source + " does not match its manifest checksum");

    const auto transcripts = read_jsonl<Transcript>(source);
    for (const auto& t : transcripts) {
        std::string body;
        std::size_t row = 0;
        for (const auto& rec : worksheet_rows(t)) {
            json j = rec;
            const Turn& turn = t.turns[row++ % t.turns.size()];
            j["speaker"] = turn.speaker;
            j["text"] = turn.text;
            body += j.dump() + "\n";
        }
        const std::string rel = "worksheets/" + t.conversation_id + ".jsonl";
        write_text_file(config_.out / rel, body);
        if (!m.is_null() && m.contains("files")) m["files"][rel] = sha256_hex(body);
    }
    if (m.contains("files")) save_manifest(manifest_path(), m);
    return transcripts.size();
}

} // namespace latprof
