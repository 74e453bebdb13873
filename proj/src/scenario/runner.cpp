// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/scenario.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace churnsim {

namespace {

/** Simulated ms kept running after the last block so it reaches everyone. */
constexpr SimTime DRAIN_MS = 5000;

std::vector<NodeId> SyncNodes(const ScenarioConfig& c)
{
    return c.sync_nodes.empty() ? c.observers : c.sync_nodes;
}

void WriteFile(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

} // namespace

WorldConfig MakeWorldConfig(const ScenarioConfig& c, uint64_t trigger_limit, bool sync)
{
    WorldConfig w;
    w.seed = c.seed;
    const LatencyRange latency{c.latency_ms.first, c.latency_ms.second};
    w.topology = BuildTopology(c.n_nodes, c.out_degree.first, c.out_degree.second, latency, DeriveSeed(c.seed, 1));
    Rng edge_rng(DeriveSeed(c.seed, 8));
    for (const auto& [a, b] : c.extra_edges) {
        SimTime l = SimTime(edge_rng.UniformInt(uint64_t(latency.lo), uint64_t(latency.hi)));
        if (auto existing = w.topology.Latency(a, b)) l = *existing;
        w.topology.AddEdge(a, b, l);
    }

    w.relay.mode = c.relay_mode;
    w.relay.graphene_model = c.graphene_model;
    w.relay.graphene = c.graphene;
    w.relay.graphene_threshold = c.graphene_threshold;
    w.relay.sync_outbound_only = c.sync_outbound_only;
    w.relay.sync_filter_seen = c.sync_filter_seen;
    w.mempool.score_mode = c.score_mode;
    w.mempool.confirmed_retention = c.confirmed_retention;

    w.arrivals.tx_rate = c.tx_rate;
    w.arrivals.block_interval_mean = c.block_interval_mean;
    w.arrivals.time_scale = c.time_scale;
    w.arrivals.parent_probability = c.parent_probability;

    w.miner = c.miner;
    w.max_block_txs = c.max_block_txs;
    w.template_delay = ScaledMillis(c.template_delay, c.time_scale);
    w.inv_interval = ScaledMillis(c.inv_interval, c.time_scale);
    for (const auto& ch : c.churn) {
        w.churn.push_back({ch.node, ScaledMillis(ch.period, c.time_scale), ch.up_fraction,
                           ScaledMillis(ch.phase, c.time_scale)});
    }
    if (sync) w.sync_nodes = SyncNodes(c);
    w.trigger_limit = trigger_limit;
    w.warm_mempool_size = c.warm_mempool_size;
    w.joiners = c.joiners;
    w.stale_mempool_size = c.stale_mempool_size;
    return w;
}

Calibration CalibrateTrigger(const ScenarioConfig& c)
{
    World world(MakeWorldConfig(c, 1, false));
    world.SpawnProcesses();
    RunBound bound;
    bound.until = SimTime(std::llround(c.calibration_seconds * 1000.0));
    world.Run(bound);

    const std::vector<NodeId> nodes = SyncNodes(c);
    uint64_t total = 0;
    for (NodeId id : nodes) total += world.Stats().incoming.at(id);
    Calibration cal;
    cal.incoming_per_second = double(total) / double(nodes.size()) / c.calibration_seconds;
    const double limit = std::round(cal.incoming_per_second * 600.0 / c.time_scale);
    cal.trigger_limit = limit < 1 ? 1 : uint64_t(limit);
    return cal;
}

RunResult RunScenario(const ScenarioConfig& config, EventLog* log)
{
    ValidateConfig(config);
    RunResult result;
    result.resolved = config;
    if (!result.resolved.trigger_limit) result.resolved.trigger_limit = CalibrateTrigger(config).trigger_limit;
    const ScenarioConfig& c = result.resolved;

    World world(MakeWorldConfig(c, *c.trigger_limit, c.sync), log);
    world.SpawnProcesses();
    RunBound bound;
    bound.blocks = c.blocks_to_run;
    bound.drain = DRAIN_MS;
    world.Run(bound);

    result.outcomes = world.Outcomes();
    try {
        result.summary = Summarize(world.OutcomesFor(c.observers[0]), world.OutcomesFor(c.observers[1]),
                                   c.blocks_to_run);
    } catch (const InsufficientData&) {
        result.summary.reset();
    }
    result.bandwidth = world.Bandwidth();
    result.stats = world.Stats();
    result.digest = world.Digest();
    return result;
}

RunResult RunExperiment(const ScenarioConfig& config, const std::filesystem::path& out_dir)
{
    ValidateConfig(config);
    std::filesystem::create_directories(out_dir);
    std::ofstream log_file(out_dir / "run.log", std::ios::trunc);
    std::ofstream detail_file(out_dir / "run.detail.log", std::ios::trunc);
    if (!log_file || !detail_file) throw std::runtime_error("cannot open log files in " + out_dir.string());
    EventLog log(&log_file, &detail_file);

    RunResult result = RunScenario(config, &log);
    if (!result.summary) throw InsufficientData("an observer saw no blocks; no summary can be written");

    std::ostringstream outcomes, rates, bandwidth, summary;
    WriteOutcomesCsv(outcomes, result.outcomes);
    WriteRatesCsv(rates, result.outcomes);
    WriteBandwidthCsv(bandwidth, result.bandwidth);
    WriteSummaryCsv(summary, result.resolved.name, *result.summary);
    WriteFile(out_dir / "outcomes.csv", outcomes.str());
    WriteFile(out_dir / "rates.csv", rates.str());
    WriteFile(out_dir / "bandwidth.csv", bandwidth.str());
    WriteFile(out_dir / "summary.csv", summary.str());
    WriteFile(out_dir / "config.resolved.json", ConfigToJson(result.resolved));
    return result;
}

} // namespace churnsim
