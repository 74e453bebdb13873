// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/scenario.h>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace churnsim {

using json = nlohmann::ordered_json;

namespace {

void Require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw ConfigError(field, what);
}

bool Positive(double v) { return std::isfinite(v) && v > 0; }

std::string ScoreModeName(ScoreMode mode) { return mode == ScoreMode::FEE_SUM ? "fee_sum" : "fee_rate"; }

template <typename T>
T Get(const json& j, const std::string& field)
{
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, std::string("wrong type (") + e.what() + ")");
    }
}

std::pair<uint64_t, uint64_t> GetPair(const json& j, const std::string& field)
{
    Require(j.is_array() && j.size() == 2, field, "expected a two-element array");
    return {Get<uint64_t>(j[0], field), Get<uint64_t>(j[1], field)};
}

std::vector<NodeId> GetIds(const json& j, const std::string& field)
{
    Require(j.is_array(), field, "expected an array of node ids");
    std::vector<NodeId> out;
    for (const json& v : j) out.push_back(Get<NodeId>(v, field));
    return out;
}

} // namespace

void ValidateConfig(const ScenarioConfig& c)
{
    Require(!c.name.empty() && c.name.find_first_of(",\n\r") == std::string::npos, "name",
            "must be nonempty and contain no commas or newlines");
    Require(c.out_degree.first >= 1 && c.out_degree.first <= c.out_degree.second, "out_degree", "need 1 <= lo <= hi");
    Require(c.n_nodes > c.out_degree.second, "n_nodes", "must exceed the maximum out-degree");
    Require(c.latency_ms.first > 0 && c.latency_ms.first <= c.latency_ms.second, "latency_ms",
            "need 0 < lo <= hi");
    Require(Positive(c.tx_rate), "tx_rate", "must be positive");
    Require(Positive(c.block_interval_mean), "block_interval_mean", "must be positive");
    Require(Positive(c.time_scale), "time_scale", "must be positive");
    Require(c.blocks_to_run >= 36, "blocks_to_run", "must be at least 36");
    Require(c.max_block_txs > 0, "max_block_txs", "must be positive");
    Require(std::isfinite(c.template_delay) && c.template_delay >= 0, "template_delay", "must be non-negative");
    Require(std::isfinite(c.inv_interval) && c.inv_interval >= 0, "inv_interval", "must be non-negative");
    Require(c.graphene.fpr > 0 && c.graphene.fpr < 1, "graphene.fpr", "must be in (0, 1)");
    Require(Positive(c.graphene.cell_multiplier), "graphene.cell_multiplier", "must be positive");
    Require(c.graphene.min_cells > 0, "graphene.min_cells", "must be positive");
    Require(c.graphene.hash_count > 0, "graphene.hash_count", "must be positive");
    Require(c.graphene_threshold >= 0 && c.graphene_threshold <= 1, "graphene.threshold", "must be in [0, 1]");
    Require(c.parent_probability >= 0 && c.parent_probability <= 1, "parent_probability", "must be in [0, 1]");
    Require(c.miner < c.n_nodes, "miner", "out of range");
    Require(c.observers.size() >= 2, "observers", "need at least two observer nodes");
    std::set<NodeId> seen;
    for (NodeId id : c.observers) {
        Require(id < c.n_nodes, "observers", "node id out of range");
        Require(id != c.miner, "observers", "the miner does not observe blocks");
        Require(seen.insert(id).second, "observers", "duplicate node id");
    }
    for (const auto& [a, b] : c.extra_edges) {
        Require(a < c.n_nodes && b < c.n_nodes && a != b, "extra_edges", "bad endpoints");
    }
    for (NodeId id : c.joiners) {
        Require(id < c.n_nodes && id != c.miner, "joiners", "bad node id");
    }
    std::set<NodeId> churned;
    for (const auto& ch : c.churn) {
        Require(ch.node < c.n_nodes, "churn.node", "out of range");
        Require(ch.node != c.miner, "churn.node", "the miner is always online");
        Require(churned.insert(ch.node).second, "churn.node", "one schedule per node");
        Require(Positive(ch.period), "churn.period", "must be positive");
        Require(ch.up_fraction > 0 && ch.up_fraction <= 1, "churn.up_fraction", "must be in (0, 1]");
        Require(std::isfinite(ch.phase) && ch.phase >= 0, "churn.phase", "must be non-negative");
        Require(ScaledMillis(ch.period, c.time_scale) > 0, "churn.period", "shorter than a millisecond after scaling");
    }
    for (NodeId id : c.sync_nodes) Require(id < c.n_nodes, "sync_nodes", "node id out of range");
    Require(!c.trigger_limit || *c.trigger_limit > 0, "trigger_limit", "must be positive");
    Require(Positive(c.calibration_seconds), "calibration_seconds", "must be positive");
}

ScenarioConfig ConfigFromJson(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("not valid JSON (") + e.what() + ")");
    }
    Require(j.is_object(), "config", "top level must be an object");

    ScenarioConfig c;
    using Setter = std::function<void(const json&)>;
    const std::map<std::string, Setter> fields{
        {"name", [&](const json& v) { c.name = Get<std::string>(v, "name"); }},
        {"seed", [&](const json& v) { c.seed = Get<uint64_t>(v, "seed"); }},
        {"n_nodes", [&](const json& v) { c.n_nodes = Get<size_t>(v, "n_nodes"); }},
        {"out_degree", [&](const json& v) { c.out_degree = GetPair(v, "out_degree"); }},
        {"latency_ms",
         [&](const json& v) {
             auto [lo, hi] = GetPair(v, "latency_ms");
             c.latency_ms = {SimTime(lo), SimTime(hi)};
         }},
        {"tx_rate", [&](const json& v) { c.tx_rate = Get<double>(v, "tx_rate"); }},
        {"block_interval_mean", [&](const json& v) { c.block_interval_mean = Get<double>(v, "block_interval_mean"); }},
        {"time_scale", [&](const json& v) { c.time_scale = Get<double>(v, "time_scale"); }},
        {"blocks_to_run", [&](const json& v) { c.blocks_to_run = Get<uint64_t>(v, "blocks_to_run"); }},
        {"max_block_txs", [&](const json& v) { c.max_block_txs = Get<size_t>(v, "max_block_txs"); }},
        {"template_delay", [&](const json& v) { c.template_delay = Get<double>(v, "template_delay"); }},
        {"inv_interval", [&](const json& v) { c.inv_interval = Get<double>(v, "inv_interval"); }},
        {"relay_mode",
         [&](const json& v) {
             auto m = ParseRelayMode(Get<std::string>(v, "relay_mode"));
             Require(m.has_value(), "relay_mode", "expected legacy, compact or graphene");
             c.relay_mode = *m;
         }},
        {"graphene_model",
         [&](const json& v) {
             auto m = ParseGrapheneModel(Get<std::string>(v, "graphene_model"));
             Require(m.has_value(), "graphene_model", "expected threshold or iblt");
             c.graphene_model = *m;
         }},
        {"graphene",
         [&](const json& v) {
             Require(v.is_object(), "graphene", "expected an object");
             for (const auto& [key, val] : v.items()) {
                 const std::string f = "graphene." + key;
                 if (key == "fpr") c.graphene.fpr = Get<double>(val, f);
                 else if (key == "cell_multiplier") c.graphene.cell_multiplier = Get<double>(val, f);
                 else if (key == "min_cells") c.graphene.min_cells = Get<size_t>(val, f);
                 else if (key == "slack") c.graphene.slack = Get<size_t>(val, f);
                 else if (key == "hash_count") c.graphene.hash_count = Get<unsigned>(val, f);
                 else if (key == "threshold") c.graphene_threshold = Get<double>(val, f);
                 else throw ConfigError(f, "unknown field");
             }
         }},
        {"score_mode",
         [&](const json& v) {
             std::string s = Get<std::string>(v, "score_mode");
             Require(s == "fee_rate" || s == "fee_sum", "score_mode", "expected fee_rate or fee_sum");
             c.score_mode = s == "fee_sum" ? ScoreMode::FEE_SUM : ScoreMode::FEE_RATE;
         }},
        {"parent_probability", [&](const json& v) { c.parent_probability = Get<double>(v, "parent_probability"); }},
        {"miner", [&](const json& v) { c.miner = Get<NodeId>(v, "miner"); }},
        {"observers", [&](const json& v) { c.observers = GetIds(v, "observers"); }},
        {"extra_edges",
         [&](const json& v) {
             Require(v.is_array(), "extra_edges", "expected an array of [from, to] pairs");
             c.extra_edges.clear();
             for (const json& e : v) {
                 auto [a, b] = GetPair(e, "extra_edges");
                 c.extra_edges.emplace_back(NodeId(a), NodeId(b));
             }
         }},
        {"warm_mempool_size", [&](const json& v) { c.warm_mempool_size = Get<size_t>(v, "warm_mempool_size"); }},
        {"joiners", [&](const json& v) { c.joiners = GetIds(v, "joiners"); }},
        {"stale_mempool_size", [&](const json& v) { c.stale_mempool_size = Get<size_t>(v, "stale_mempool_size"); }},
        {"churn",
         [&](const json& v) {
             Require(v.is_array(), "churn", "expected an array of schedules");
             c.churn.clear();
             for (const json& s : v) {
                 Require(s.is_object(), "churn", "expected an object per schedule");
                 ScenarioConfig::Churn ch;
                 for (const auto& [key, val] : s.items()) {
                     const std::string f = "churn." + key;
                     if (key == "node") ch.node = Get<NodeId>(val, f);
                     else if (key == "period") ch.period = Get<double>(val, f);
                     else if (key == "up_fraction") ch.up_fraction = Get<double>(val, f);
                     else if (key == "phase") ch.phase = Get<double>(val, f);
                     else throw ConfigError(f, "unknown field");
                 }
                 c.churn.push_back(ch);
             }
         }},
        {"sync", [&](const json& v) { c.sync = Get<bool>(v, "sync"); }},
        {"sync_nodes", [&](const json& v) { c.sync_nodes = GetIds(v, "sync_nodes"); }},
        {"sync_outbound_only", [&](const json& v) { c.sync_outbound_only = Get<bool>(v, "sync_outbound_only"); }},
        {"sync_filter_seen", [&](const json& v) { c.sync_filter_seen = Get<bool>(v, "sync_filter_seen"); }},
        {"trigger_limit",
         [&](const json& v) {
             if (v.is_null()) c.trigger_limit.reset();
             else c.trigger_limit = Get<uint64_t>(v, "trigger_limit");
         }},
        {"calibration_seconds", [&](const json& v) { c.calibration_seconds = Get<double>(v, "calibration_seconds"); }},
        {"confirmed_retention", [&](const json& v) { c.confirmed_retention = Get<size_t>(v, "confirmed_retention"); }},
    };
    for (const auto& [key, val] : j.items()) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError(key, "unknown field");
        it->second(val);
    }
    return c;
}

std::string ConfigToJson(const ScenarioConfig& c)
{
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["n_nodes"] = c.n_nodes;
    j["out_degree"] = {c.out_degree.first, c.out_degree.second};
    j["latency_ms"] = {c.latency_ms.first, c.latency_ms.second};
    j["tx_rate"] = c.tx_rate;
    j["block_interval_mean"] = c.block_interval_mean;
    j["time_scale"] = c.time_scale;
    j["blocks_to_run"] = c.blocks_to_run;
    j["max_block_txs"] = c.max_block_txs;
    j["template_delay"] = c.template_delay;
    j["inv_interval"] = c.inv_interval;
    j["relay_mode"] = std::string(RelayModeName(c.relay_mode));
    j["graphene_model"] = std::string(GrapheneModelName(c.graphene_model));
    j["graphene"] = {{"fpr", c.graphene.fpr},
                     {"cell_multiplier", c.graphene.cell_multiplier},
                     {"min_cells", c.graphene.min_cells},
                     {"slack", c.graphene.slack},
                     {"hash_count", c.graphene.hash_count},
                     {"threshold", c.graphene_threshold}};
    j["score_mode"] = ScoreModeName(c.score_mode);
    j["parent_probability"] = c.parent_probability;
    j["miner"] = c.miner;
    j["observers"] = c.observers;
    j["extra_edges"] = json::array();
    for (const auto& [a, b] : c.extra_edges) j["extra_edges"].push_back({a, b});
    j["warm_mempool_size"] = c.warm_mempool_size;
    j["joiners"] = c.joiners;
    j["stale_mempool_size"] = c.stale_mempool_size;
    j["churn"] = json::array();
    for (const auto& ch : c.churn) {
        j["churn"].push_back({{"node", ch.node}, {"period", ch.period}, {"up_fraction", ch.up_fraction}, {"phase", ch.phase}});
    }
    j["sync"] = c.sync;
    j["sync_nodes"] = c.sync_nodes;
    j["sync_outbound_only"] = c.sync_outbound_only;
    j["sync_filter_seen"] = c.sync_filter_seen;
    j["trigger_limit"] = c.trigger_limit ? json(*c.trigger_limit) : json(nullptr);
    j["calibration_seconds"] = c.calibration_seconds;
    j["confirmed_retention"] = c.confirmed_retention;
    return j.dump(2) + "\n";
}

ScenarioConfig LoadConfig(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ConfigFromJson(ss.str());
}

} // namespace churnsim
