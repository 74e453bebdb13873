// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_SCENARIO_H
#define CHURNSIM_SCENARIO_H

#include <churnsim/metrics.h>
#include <churnsim/netsim.h>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace churnsim {

/** Durations are in uncompressed seconds unless the name says otherwise. */
struct ScenarioConfig {
    std::string name{"custom"};
    uint64_t seed{1};
    size_t n_nodes{20};
    std::pair<size_t, size_t> out_degree{8, 12};
    std::pair<SimTime, SimTime> latency_ms{30, 70};
    double tx_rate{2.0};
    double block_interval_mean{600.0};
    double time_scale{10.0};
    uint64_t blocks_to_run{750};
    size_t max_block_txs{2000};
    double template_delay{0.0};
    double inv_interval{0.0};
    RelayMode relay_mode{RelayMode::COMPACT};
    GrapheneModel graphene_model{GrapheneModel::THRESHOLD};
    GrapheneParams graphene;
    double graphene_threshold{0.15};
    ScoreMode score_mode{ScoreMode::FEE_RATE};
    double parent_probability{0.0};
    NodeId miner{0};
    /** The first two are compared in the summary: stable, then intermittent. */
    std::vector<NodeId> observers{1, 2};
    std::vector<std::pair<NodeId, NodeId>> extra_edges;
    size_t warm_mempool_size{0};
    std::vector<NodeId> joiners;
    size_t stale_mempool_size{0};
    struct Churn {
        NodeId node{0};
        double period{600.0};
        double up_fraction{0.9};
        double phase{0.0};
    };
    std::vector<Churn> churn;
    bool sync{false};
    std::vector<NodeId> sync_nodes;
    bool sync_outbound_only{false};
    bool sync_filter_seen{false};
    /** Unset: calibrated from a pre-run. */
    std::optional<uint64_t> trigger_limit;
    /** Simulated seconds of the calibration pre-run. */
    double calibration_seconds{60.0};
    size_t confirmed_retention{200000};
};

class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), m_field{field}
    {
    }
    const std::string& Field() const { return m_field; }

private:
    std::string m_field;
};

/** Throws ConfigError naming the first offending field. */
void ValidateConfig(const ScenarioConfig& config);

/** Missing keys keep their defaults; unknown keys and bad types throw ConfigError. */
ScenarioConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const ScenarioConfig& config);
ScenarioConfig LoadConfig(const std::filesystem::path& path);

std::vector<std::string> PresetNames();
/** Throws ConfigError for an unknown name. */
ScenarioConfig Preset(const std::string& name);

/** World setup for a scenario; `sync` overrides the config's flag. */
WorldConfig MakeWorldConfig(const ScenarioConfig& config, uint64_t trigger_limit, bool sync);

struct Calibration {
    double incoming_per_second{0};
    uint64_t trigger_limit{1};
};

/** Pre-run with sync off; limit = round(rate * 600 / time_scale) at the sync nodes. */
Calibration CalibrateTrigger(const ScenarioConfig& config);

struct RunResult {
    ScenarioConfig resolved;
    std::vector<BlockOutcome> outcomes;
    std::optional<RunSummary> summary;
    BandwidthLedger bandwidth;
    WorldStats stats;
    uint64_t digest{0};
};

RunResult RunScenario(const ScenarioConfig& config, EventLog* log = nullptr);

/**
 * Validate, run, and write outcomes.csv, rates.csv, bandwidth.csv,
 * summary.csv, run.log, run.detail.log and config.resolved.json into out_dir.
 */
RunResult RunExperiment(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct NodeDelta {
    NodeId node{0};
    double rate_a{0};
    double rate_b{0};
    /** rate_b - rate_a, percentage points. */
    double delta_pp{0};
};

struct Comparison {
    std::string scenario_a;
    std::string scenario_b;
    std::vector<NodeDelta> nodes;
    double gap_a{0};
    double gap_b{0};
    /** gap_a - gap_b, percentage points. */
    double gap_reduction_pp{0};
    /** gap_reduction_pp / gap_a, percent; 0 when gap_a is 0. */
    double gap_reduction_pct{0};
};

/** Throws SchemaError if the node sets differ. */
Comparison CompareSummaries(const SummaryTable& a, const SummaryTable& b);
Comparison CompareRuns(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b);
void WriteComparisonCsv(std::ostream& os, const Comparison& cmp);

} // namespace churnsim

#endif // CHURNSIM_SCENARIO_H
