// SPDX-License-Identifier: Apache-2.0
#include "latprof/errors.hpp"
#include "latprof/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfig = 2, kStage = 3, kIntegrity = 4 };

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::vector<std::string> topics;
    std::string agent_endpoint, judge_endpoint, agent_model, judge_model, backend;
    int pairs_per_cell = 3;
    int max_turns = 5;
    double diversity_threshold = latprof::kDefaultDiversityThreshold;
    std::string out;
    bool allow_same_judge_model = false;
    bool verbose = false;
};

latprof::RunConfig build_config(const Flags& f, const CLI::App& app) {
    namespace fs = std::filesystem;
    latprof::RunConfig c;
    if (!f.config.empty()) {
        c = latprof::load_run_config(f.config);
    } else if (!f.out.empty() && fs::exists(fs::path(f.out) / "config.json")) {
        c = latprof::load_run_config(fs::path(f.out) / "config.json");
    }
    const auto given = [&app](const char* name) { return app.count(name) > 0; };
    if (given("--seed")) c.seed = f.seed;
    if (given("--topic")) c.topics = f.topics;
    if (given("--agent-endpoint")) c.agent_endpoint = f.agent_endpoint;
    if (given("--judge-endpoint")) c.judge_endpoint = f.judge_endpoint;
    if (given("--agent-model")) c.agent_model = f.agent_model;
    if (given("--judge-model")) c.judge_model = f.judge_model;
    if (given("--backend")) c.backend = latprof::parse_backend_kind(f.backend);
    if (given("--pairs-per-cell")) c.pairs_per_cell = f.pairs_per_cell;
    if (given("--max-turns")) c.max_turns = f.max_turns;
    if (given("--diversity-threshold")) c.diversity_threshold = f.diversity_threshold;
    if (given("--allow-same-judge-model")) c.allow_same_judge_model = true;
    if (given("--out")) c.out = f.out;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latprof: persona-consistency harness for conversational agents"};
    app.require_subcommand(1, 1);
    Flags f;
    app.add_option("--config", f.config, "JSON run config");
    app.add_option("--seed", f.seed, "Master seed");
    app.add_option("--topic", f.topics, "Topic id to run (repeatable; default all)");
    app.add_option("--agent-endpoint", f.agent_endpoint, "Chat-completions base URL for agents");
    app.add_option("--judge-endpoint", f.judge_endpoint, "Chat-completions base URL for the judge");
    app.add_option("--agent-model", f.agent_model, "Agent model id");
    app.add_option("--judge-model", f.judge_model, "Judge model id");
    app.add_option("--backend", f.backend, "http or scripted")->check(CLI::IsMember({"http", "scripted"}));
    app.add_option("--pairs-per-cell", f.pairs_per_cell, "Conversations sampled per tuple pair (default 3)");
    app.add_option("--max-turns", f.max_turns, "Turns per agent (default 5)");
    app.add_option("--diversity-threshold", f.diversity_threshold, "Self-BLEU removal threshold (default 0.1926)");
    app.add_option("--out", f.out, "Run directory");
    app.add_flag("--allow-same-judge-model", f.allow_same_judge_model, "Let the judge share the agent model");
    app.add_flag("-v,--verbose", f.verbose, "Debug logging");

    std::vector<CLI::App*> subs;
    subs.push_back(app.add_subcommand("run", "Run every stage, resuming where possible"));
    for (const auto s : latprof::kAllStages)
        subs.push_back(app.add_subcommand(std::string(latprof::to_string(s)), "Run the " +
                                                                                  std::string(latprof::to_string(s)) +
                                                                                  " stage only"));
    subs.push_back(app.add_subcommand("worksheet", "Emit annotation worksheets for the run's transcripts"));
    for (auto* sub : subs) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }
    spdlog::set_level(f.verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_default_logger(spdlog::default_logger()->clone("latprof"));

    try {
        latprof::Pipeline pipeline(build_config(f, app));
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "worksheet") {
            const auto n = pipeline.write_worksheets();
            std::cout << "wrote " << n << " worksheets to " << (pipeline.config().out / "worksheets").string() << "\n";
            return kOk;
        }
        std::vector<latprof::StageOutcome> outcomes;
        if (cmd == "run")
            outcomes = pipeline.run_all();
        else
            outcomes.push_back(pipeline.run_stage(latprof::parse_stage(cmd)));
        for (const auto& o : outcomes)
            std::cout << latprof::to_string(o.stage) << ": "
                      << (o.status == latprof::StageStatus::Ran ? "ran" : "skipped (up to date)") << "\n";
        return kOk;
    } catch (const latprof::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const latprof::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const std::exception& e) {
        std::cerr << "stage failed: " << e.what() << "\n";
        return kStage;
    }
}
