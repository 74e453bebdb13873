// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_NETSIM_H
#define CHURNSIM_NETSIM_H

#include <churnsim/metrics.h>
#include <churnsim/node.h>
#include <churnsim/random.h>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace churnsim {

//
// Topology
//

struct LatencyRange {
    SimTime lo{30};
    SimTime hi{70};
};

class Topology
{
public:
    explicit Topology(size_t n = 0);

    size_t Size() const { return m_outbound.size(); }
    const std::vector<NodeId>& Outbound(NodeId node) const { return m_outbound.at(node); }
    std::vector<NodeId> Inbound(NodeId node) const;
    /** Union of inbound and outbound, ascending. */
    std::vector<NodeId> Neighbors(NodeId node) const;
    bool HasEdge(NodeId from, NodeId to) const;
    /** Latency of the connection between a and b, or nullopt if not connected either way. */
    std::optional<SimTime> Latency(NodeId a, NodeId b) const;

    /** Adds from -> to. A pair already connected the other way keeps its latency. Returns false on a duplicate. */
    bool AddEdge(NodeId from, NodeId to, SimTime latency);
    bool IsWeaklyConnected() const;
    size_t EdgeCount() const;

    bool operator==(const Topology&) const = default;

private:
    std::vector<std::vector<NodeId>> m_outbound;
    /** Symmetric n x n table; 0 means not connected. */
    std::vector<SimTime> m_latency;
};

/**
 * Random directed graph: each node draws an out-degree in [lo, hi] and picks
 * distinct targets. Redrawn until weakly connected. Throws
 * std::invalid_argument if n <= hi or lo > hi or lo == 0.
 */
Topology BuildTopology(size_t n, size_t degree_lo, size_t degree_hi, LatencyRange latency, uint64_t seed);

//
// Churn
//

struct ChurnSchedule {
    NodeId node{0};
    SimTime period{60000};
    double up_fraction{0.9};
    SimTime phase{0};
};

/** Online iff ((t + phase) mod period) < up_fraction * period. */
bool ChurnOnline(const ChurnSchedule& schedule, SimTime t);
/** First time after t at which the state flips. */
SimTime ChurnNextTransition(const ChurnSchedule& schedule, SimTime t);
/** Throws std::invalid_argument on a non-positive period or up_fraction outside (0, 1]. */
void ValidateChurn(const ChurnSchedule& schedule);

//
// Arrival processes
//

struct ArrivalConfig {
    /** Transactions per uncompressed second. */
    double tx_rate{2.0};
    /** Uncompressed seconds. */
    double block_interval_mean{600.0};
    /** Simulated time runs this many times faster than the configured rates. */
    double time_scale{10.0};
    int64_t fee_min{1};
    int64_t fee_max{1000};
    uint32_t size_min{500};
    uint32_t size_max{800};
    /** Chance that a new transaction spends an unconfirmed one held by its origin. */
    double parent_probability{0.0};
};

/** Milliseconds of simulated time for `seconds` of uncompressed time. */
SimTime ScaledMillis(double seconds, double time_scale);

//
// World
//

struct WorldConfig {
    uint64_t seed{1};
    Topology topology;
    RelayConfig relay;
    Mempool::Options mempool;
    ArrivalConfig arrivals;
    NodeId miner{0};
    size_t max_block_txs{2000};
    /** Simulated ms a transaction must age before the miner will include it. */
    SimTime template_delay{0};
    /** Mean simulated ms between inventory trickles per node; 0 sends at once. */
    SimTime inv_interval{0};
    std::vector<ChurnSchedule> churn;
    std::vector<NodeId> sync_nodes;
    uint64_t trigger_limit{1};
    /** Backlog of unconfirmed transactions every non-joiner holds at start. */
    size_t warm_mempool_size{0};
    std::vector<NodeId> joiners;
    /** Transactions a joiner holds at start that everyone else already saw confirmed. */
    size_t stale_mempool_size{0};
    bool record_trace{false};
};

struct WorldStats {
    uint64_t events{0};
    uint64_t delivered{0};
    uint64_t dropped{0};
    uint64_t txs_created{0};
    uint64_t blocks_mined{0};
    /** Accepted blocks that no MineBlock event produced; always 0. */
    uint64_t untraceable_blocks{0};
    /** Events that ran earlier than the event that scheduled them; always 0. */
    uint64_t causality_violations{0};
    /** Messages handled by a node while it was offline; always 0. */
    uint64_t offline_handled{0};
    std::vector<uint64_t> incoming;
    std::vector<uint64_t> sync_fired;
};

struct RunBound {
    /** Stop mining after this many blocks (0 = no limit). */
    uint64_t blocks{0};
    /** Keep running this long after the last block so it can propagate. */
    SimTime drain{5000};
    SimTime until{std::numeric_limits<SimTime>::max()};
};

class World
{
public:
    explicit World(WorldConfig config, EventLog* log = nullptr);

    /** Schedule churn, transaction arrivals, block mining and inventory trickles. */
    void SpawnProcesses();
    void ScheduleDeliver(SimTime at, NodeId from, NodeId to, MessageRef msg);
    void ScheduleTransaction(SimTime at, NodeId origin, TxRef tx);

    /** Process events in (time, seq) order until the bound or an empty queue. */
    void Run(const RunBound& bound);

    SimTime Now() const { return m_now; }
    size_t Size() const { return m_nodes.size(); }
    Node& GetNode(NodeId id) { return m_nodes.at(id); }
    const Node& GetNode(NodeId id) const { return m_nodes.at(id); }
    bool IsOnline(NodeId id) const { return m_online.at(id); }
    const WorldConfig& Config() const { return m_config; }

    const std::vector<BlockOutcome>& Outcomes() const { return m_outcomes; }
    std::vector<BlockOutcome> OutcomesFor(NodeId node) const;
    const BandwidthLedger& Bandwidth() const { return m_bandwidth; }
    const std::vector<TraceMessage>& Trace() const { return m_trace; }
    const WorldStats& Stats() const { return m_stats; }
    const std::vector<BlockId>& MinedBlocks() const { return m_mined_order; }
    /** Running hash over every processed event; equal digests mean equal traces. */
    uint64_t Digest() const { return m_digest; }

    /** Called for every message handled by a node, before handling. */
    std::function<void(SimTime, NodeId from, NodeId to, const Message&)> on_handle;

private:
    enum class EventKind : uint8_t { DELIVER, NODE_UP, NODE_DOWN, MINE_BLOCK, TX_ARRIVAL, INV_FLUSH, INJECT_TX };
    struct Event {
        SimTime time;
        uint64_t seq;
        SimTime scheduled_at;
        EventKind kind;
        NodeId a;
        NodeId b;
        MessageRef msg;
        TxRef tx;
    };
    struct Later {
        bool operator()(const Event& x, const Event& y) const
        {
            return x.time != y.time ? x.time > y.time : x.seq > y.seq;
        }
    };

    void Push(SimTime at, EventKind kind, NodeId a, NodeId b, MessageRef msg = nullptr, TxRef tx = nullptr);
    void Dispatch(NodeId node, HandleResult res);
    void Observe(NodeId node, const BlockObservation& obs);
    void Preload();
    void OnTxArrival();
    void OnMineBlock();
    void OnNodeDown(NodeId node);
    void OnNodeUp(NodeId node);
    void Log(NodeId node, std::string kind, std::vector<std::pair<std::string, std::string>> attrs,
             std::optional<std::string> detail = std::nullopt);
    void Mix(uint64_t v);

    WorldConfig m_config;
    EventLog* m_log;
    std::vector<Node> m_nodes;
    std::vector<bool> m_online;
    std::vector<uint64_t> m_lost_while_down;
    std::vector<uint64_t> m_block_time;
    std::priority_queue<Event, std::vector<Event>, Later> m_queue;
    uint64_t m_seq{0};
    SimTime m_now{0};
    bool m_mining{true};
    RunBound m_bound;
    std::optional<SimTime> m_stop_at;

    Rng m_tx_rng;
    Rng m_block_rng;
    Rng m_trickle_rng;
    uint64_t m_tx_counter{0};
    std::vector<TxId> m_recent;
    size_t m_recent_pos{0};

    std::unordered_set<BlockId> m_mined;
    std::vector<BlockId> m_mined_order;
    std::vector<BlockOutcome> m_outcomes;
    BandwidthLedger m_bandwidth;
    std::vector<TraceMessage> m_trace;
    WorldStats m_stats;
    uint64_t m_digest{0x6a09e667f3bcc908ULL};
};

} // namespace churnsim

#endif // CHURNSIM_NETSIM_H
