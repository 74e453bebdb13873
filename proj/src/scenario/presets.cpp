// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/scenario.h>

namespace churnsim {

namespace {

/** 20 nodes; a stable observer (1) and a second observer (2) joined by an extra edge. */
ScenarioConfig DeskBase(const std::string& name)
{
    ScenarioConfig c;
    c.name = name;
    c.seed = 1;
    c.n_nodes = 20;
    c.out_degree = {8, 12};
    c.latency_ms = {30, 70};
    c.tx_rate = 2.0;
    c.block_interval_mean = 600.0;
    c.time_scale = 10.0;
    c.blocks_to_run = 750;
    c.max_block_txs = 2000;
    c.template_delay = 30.0;
    c.inv_interval = 2.0;
    c.relay_mode = RelayMode::COMPACT;
    c.parent_probability = 0.05;
    c.miner = 0;
    c.observers = {1, 2};
    c.extra_edges = {{1, 2}};
    c.warm_mempool_size = 6000;
    // Sync, when enabled, runs on every node.
    for (size_t i = 0; i < c.n_nodes; ++i) c.sync_nodes.push_back(static_cast<NodeId>(i));
    return c;
}

ScenarioConfig ChurnBase(const std::string& name)
{
    ScenarioConfig c = DeskBase(name);
    c.churn = {{2, 600.0, 0.9, 0.0}};
    return c;
}

} // namespace

std::vector<std::string> PresetNames()
{
    return {"fresh-join", "churn-nosync", "churn-sync", "churn-sync-pair", "graphene-sim"};
}

ScenarioConfig Preset(const std::string& name)
{
    if (name == "fresh-join") {
        ScenarioConfig c = DeskBase(name);
        c.blocks_to_run = 300;
        c.joiners = {2};
        c.stale_mempool_size = 3000;
        c.warm_mempool_size = 40000;
        return c;
    }
    if (name == "churn-nosync") return ChurnBase(name);
    if (name == "churn-sync") {
        ScenarioConfig c = ChurnBase(name);
        c.sync = true;
        return c;
    }
    if (name == "churn-sync-pair") {
        // Only the two observers sync.
        ScenarioConfig c = ChurnBase(name);
        c.sync = true;
        c.sync_nodes = {1, 2};
        return c;
    }
    if (name == "graphene-sim") {
        ScenarioConfig c = ChurnBase(name);
        c.relay_mode = RelayMode::GRAPHENE;
        c.graphene_model = GrapheneModel::THRESHOLD;
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

} // namespace churnsim
