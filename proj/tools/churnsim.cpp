// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/scenario.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace churnsim;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_RUNTIME = 3;

struct RunOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> blocks;
    std::optional<uint64_t> trigger_limit;
    std::string sync;
    std::string protocol;
    std::string graphene_model;
};

ScenarioConfig ResolveConfig(const RunOptions& opt)
{
    ScenarioConfig c = opt.preset.empty() ? LoadConfig(opt.config_path) : Preset(opt.preset);
    if (opt.seed) c.seed = *opt.seed;
    if (opt.blocks) c.blocks_to_run = *opt.blocks;
    if (opt.trigger_limit) c.trigger_limit = *opt.trigger_limit;
    if (!opt.sync.empty()) c.sync = opt.sync == "on";
    if (!opt.protocol.empty()) {
        auto mode = ParseRelayMode(opt.protocol);
        if (!mode) throw ConfigError("protocol", "expected legacy, compact or graphene");
        c.relay_mode = *mode;
    }
    if (!opt.graphene_model.empty()) {
        auto model = ParseGrapheneModel(opt.graphene_model);
        if (!model) throw ConfigError("graphene-model", "expected threshold or iblt");
        c.graphene_model = *model;
    }
    ValidateConfig(c);
    return c;
}

int DoRun(const RunOptions& opt)
{
    ScenarioConfig config = ResolveConfig(opt);
    const std::string out_dir = opt.out_dir.empty() ? "runs/" + config.name : opt.out_dir;
    RunResult r = RunExperiment(config, out_dir);
    const RunSummary& s = *r.summary;
    std::printf("%s: node %u %.2f%% (%llu/%llu), node %u %.2f%% (%llu/%llu), gap %.2f pp, trigger_limit %llu\n",
                r.resolved.name.c_str(), s.a.node, s.a.avg_rate * 100, (unsigned long long)s.a.successes,
                (unsigned long long)s.a.blocks, s.b.node, s.b.avg_rate * 100, (unsigned long long)s.b.successes,
                (unsigned long long)s.b.blocks, s.gap_pp, (unsigned long long)*r.resolved.trigger_limit);
    std::printf("wrote %s\n", out_dir.c_str());
    return 0;
}

int DoCompare(const std::string& a, const std::string& b, const std::string& out_path)
{
    Comparison cmp = CompareRuns(a, b);
    WriteComparisonCsv(std::cout, cmp);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        WriteComparisonCsv(out, cmp);
        if (!out) throw std::runtime_error("cannot write " + out_path);
    }
    return 0;
}

int DoPresets(const std::string& dump)
{
    if (!dump.empty()) {
        std::cout << ConfigToJson(Preset(dump));
        return 0;
    }
    for (const std::string& name : PresetNames()) std::cout << name << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator of block and transaction relay under churn"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Run one scenario and write its CSVs and logs");
    auto* config_flag = run->add_option("--config", run_opt.config_path, "Scenario JSON file")->check(CLI::ExistingFile);
    auto* preset_flag = run->add_option("--preset", run_opt.preset, "Built-in scenario name");
    config_flag->excludes(preset_flag);
    run->add_option("--out-dir", run_opt.out_dir, "Output directory (default runs/<name>)");
    run->add_option("--seed", run_opt.seed, "Override the seed");
    run->add_option("--blocks", run_opt.blocks, "Override blocks_to_run");
    run->add_option("--trigger-limit", run_opt.trigger_limit, "Fix the sync trigger limit instead of calibrating");
    run->add_option("--sync", run_opt.sync, "Enable sync on the sync nodes")->check(CLI::IsMember({"on", "off"}));
    run->add_option("--protocol", run_opt.protocol, "Block relay protocol")
        ->check(CLI::IsMember({"legacy", "compact", "graphene"}));
    run->add_option("--graphene-model", run_opt.graphene_model, "Graphene outcome model")
        ->check(CLI::IsMember({"threshold", "iblt"}));

    std::string cmp_a, cmp_b, cmp_out;
    CLI::App* compare = app.add_subcommand("compare", "Compare the summaries of two runs");
    compare->add_option("dir_a", cmp_a, "Baseline run directory")->required()->check(CLI::ExistingDirectory);
    compare->add_option("dir_b", cmp_b, "Comparison run directory")->required()->check(CLI::ExistingDirectory);
    compare->add_option("--out", cmp_out, "Also write the comparison CSV here");

    std::string dump;
    CLI::App* presets = app.add_subcommand("presets", "List built-in scenarios");
    presets->add_option("--dump", dump, "Print the named preset as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : EXIT_CONFIG;
    }

    try {
        if (*run) {
            if (run_opt.config_path.empty() && run_opt.preset.empty()) {
                throw ConfigError("config", "one of --config or --preset is required");
            }
            return DoRun(run_opt);
        }
        if (*compare) return DoCompare(cmp_a, cmp_b, cmp_out);
        if (*presets) return DoPresets(dump);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return EXIT_RUNTIME;
    }
    return 0;
}
