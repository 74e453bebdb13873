// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/netsim.h>

#include <algorithm>
#include <stdexcept>

namespace churnsim {

namespace {

constexpr size_t RECENT_TXS = 1000;

uint64_t SplitMix(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double MeanTxGapMillis(const ArrivalConfig& a)
{
    return 1000.0 / (a.tx_rate * a.time_scale);
}

TxRef DrawTransaction(Rng& rng, const ArrivalConfig& a, const TxId& id, SimTime created_at,
                      std::vector<TxId> parents = {})
{
    Transaction tx;
    tx.id = id;
    tx.fee = int64_t(rng.UniformInt(uint64_t(a.fee_min), uint64_t(a.fee_max)));
    tx.size_bytes = uint32_t(rng.UniformInt(a.size_min, a.size_max));
    tx.parents = std::move(parents);
    tx.created_at = created_at;
    return MakeTxRef(std::move(tx));
}

std::string_view ObservationKind(const BlockObservation& obs)
{
    switch (obs.protocol) {
    case RelayMode::LEGACY: return "legacy_block";
    case RelayMode::COMPACT: return obs.success ? "cmpct_success" : "cmpct_fail";
    case RelayMode::GRAPHENE: return obs.success ? "graphene_success" : "graphene_fail";
    }
    return "block";
}

} // namespace

World::World(WorldConfig config, EventLog* log)
    : m_config{std::move(config)},
      m_log{log},
      m_tx_rng{DeriveSeed(m_config.seed, 2)},
      m_block_rng{DeriveSeed(m_config.seed, 3)},
      m_trickle_rng{DeriveSeed(m_config.seed, 4)}
{
    const size_t n = m_config.topology.Size();
    if (n == 0) throw std::invalid_argument("world needs at least one node");
    if (m_config.miner >= n) throw std::invalid_argument("miner id out of range");
    if (m_config.max_block_txs == 0) throw std::invalid_argument("max_block_txs must be positive");
    const ArrivalConfig& a = m_config.arrivals;
    if (!(a.tx_rate > 0) || !(a.block_interval_mean > 0) || !(a.time_scale > 0)) {
        throw std::invalid_argument("arrival rates and time scale must be positive");
    }
    if (a.fee_min < 0 || a.fee_min > a.fee_max || a.size_min == 0 || a.size_min > a.size_max) {
        throw std::invalid_argument("bad fee or size range");
    }
    if (m_config.trigger_limit == 0) throw std::invalid_argument("trigger_limit must be positive");

    std::vector<bool> churned(n, false);
    for (const ChurnSchedule& s : m_config.churn) {
        ValidateChurn(s);
        if (s.node >= n) throw std::invalid_argument("churn node out of range");
        if (s.node == m_config.miner) throw std::invalid_argument("the miner cannot churn");
        if (churned[s.node]) throw std::invalid_argument("one churn schedule per node");
        churned[s.node] = true;
    }
    for (NodeId id : m_config.sync_nodes) {
        if (id >= n) throw std::invalid_argument("sync node out of range");
    }
    for (NodeId id : m_config.joiners) {
        if (id >= n) throw std::invalid_argument("joiner out of range");
    }

    RelayConfig relay = m_config.relay;
    relay.trickle_inventory = m_config.inv_interval > 0;
    m_nodes.reserve(n);
    for (NodeId id = 0; id < n; ++id) {
        Node& node = m_nodes.emplace_back(id, relay, m_config.mempool);
        for (NodeId peer : m_config.topology.Neighbors(id)) node.AddPeer(peer, m_config.topology.HasEdge(id, peer));
        node.Trigger().limit = m_config.trigger_limit;
        node.Trigger().enabled = false;
    }
    for (NodeId id : m_config.sync_nodes) m_nodes[id].Trigger().enabled = true;

    m_online.assign(n, true);
    for (const ChurnSchedule& s : m_config.churn) m_online[s.node] = ChurnOnline(s, 0);
    m_lost_while_down.assign(n, 0);
    m_block_time.assign(n, 0);
    m_stats.incoming.assign(n, 0);
    m_stats.sync_fired.assign(n, 0);
    m_recent.resize(RECENT_TXS);
    Preload();
}

void World::Preload()
{
    const size_t n = m_nodes.size();
    Rng rng(DeriveSeed(m_config.seed, 5));
    std::vector<bool> joiner(n, false);
    for (NodeId id : m_config.joiners) joiner[id] = true;

    const double gap = MeanTxGapMillis(m_config.arrivals);
    const uint64_t warm_seed = DeriveSeed(m_config.seed, 6);
    for (size_t i = 0; i < m_config.warm_mempool_size; ++i) {
        const SimTime created = -1 - SimTime(double(m_config.warm_mempool_size - i) * gap);
        TxRef tx = DrawTransaction(rng, m_config.arrivals, MakeTxId(warm_seed, i), created);
        for (NodeId id = 0; id < n; ++id) {
            if (!joiner[id]) m_nodes[id].GetMempool().Insert(tx);
        }
    }
    const uint64_t stale_seed = DeriveSeed(m_config.seed, 7);
    for (size_t i = 0; i < m_config.stale_mempool_size; ++i) {
        TxRef tx = DrawTransaction(rng, m_config.arrivals, MakeTxId(stale_seed, i), -1);
        for (NodeId id = 0; id < n; ++id) {
            if (joiner[id]) m_nodes[id].GetMempool().Insert(tx);
            else m_nodes[id].GetMempool().MarkConfirmed(tx->id);
        }
    }
}

void World::Push(SimTime at, EventKind kind, NodeId a, NodeId b, MessageRef msg, TxRef tx)
{
    m_queue.push(Event{at, m_seq++, m_now, kind, a, b, std::move(msg), std::move(tx)});
}

void World::ScheduleDeliver(SimTime at, NodeId from, NodeId to, MessageRef msg)
{
    Push(at, EventKind::DELIVER, from, to, std::move(msg));
}

void World::ScheduleTransaction(SimTime at, NodeId origin, TxRef tx)
{
    Push(at, EventKind::INJECT_TX, origin, origin, nullptr, std::move(tx));
}

void World::SpawnProcesses()
{
    for (const ChurnSchedule& s : m_config.churn) {
        SimTime next = ChurnNextTransition(s, m_now);
        if (next == std::numeric_limits<SimTime>::max()) continue;
        Push(next, m_online[s.node] ? EventKind::NODE_DOWN : EventKind::NODE_UP, s.node, s.node);
    }
    const ArrivalConfig& a = m_config.arrivals;
    Push(m_now + SimTime(m_tx_rng.Exponential(MeanTxGapMillis(a))), EventKind::TX_ARRIVAL, 0, 0);
    const double block_mean = a.block_interval_mean * 1000.0 / a.time_scale;
    Push(m_now + SimTime(m_block_rng.Exponential(block_mean)), EventKind::MINE_BLOCK, m_config.miner, m_config.miner);
    if (m_config.inv_interval > 0) {
        for (NodeId id = 0; id < m_nodes.size(); ++id) {
            Push(m_now + 1 + SimTime(m_trickle_rng.Exponential(double(m_config.inv_interval))), EventKind::INV_FLUSH, id,
                 id);
        }
    }
}

void World::Mix(uint64_t v)
{
    m_digest = SplitMix(m_digest ^ v);
}

void World::Log(NodeId node, std::string kind, std::vector<std::pair<std::string, std::string>> attrs,
                std::optional<std::string> detail)
{
    if (!m_log) return;
    m_log->Record(LogEntry{m_now, node, std::move(kind), std::move(attrs), std::move(detail)});
}

void World::Observe(NodeId node, const BlockObservation& obs)
{
    BlockOutcome o;
    o.node = node;
    o.block_time = m_block_time[node]++;
    o.block_id = obs.block_id;
    o.protocol = obs.protocol;
    o.success = obs.success;
    o.missing = obs.missing;
    o.round_trips = obs.round_trips;
    o.bytes_down = obs.bytes_down;
    o.bytes_up = obs.bytes_up;
    m_outcomes.push_back(o);

    if (!m_log) return;
    std::optional<std::string> detail;
    if (!obs.success && (!obs.requested_indexes.empty() || !obs.requested_ids.empty())) {
        detail = std::to_string(node) + "-" + std::to_string(o.block_time);
        DetailRecord rec{*detail, obs.requested_indexes.empty() ? "requested_ids" : "requested_indexes", {}};
        for (uint32_t i : obs.requested_indexes) rec.values.push_back(std::to_string(i));
        for (const TxId& id : obs.requested_ids) rec.values.push_back(id.ToHex());
        m_log->RecordDetail(rec);
    }
    Log(node, std::string(ObservationKind(obs)),
        {{"block", obs.block_id.ToHex()},
         {"height", std::to_string(obs.height)},
         {"block_time", std::to_string(o.block_time)},
         {"missing", std::to_string(obs.missing)},
         {"round_trips", std::to_string(obs.round_trips)},
         {"decode_failures", std::to_string(obs.decode_failures)},
         {"bytes_down", std::to_string(obs.bytes_down)},
         {"bytes_up", std::to_string(obs.bytes_up)},
         {"abandoned", obs.abandoned ? "1" : "0"}},
        std::move(detail));
}

void World::Dispatch(NodeId node, HandleResult res)
{
    for (Outgoing& out : res.out) {
        std::optional<SimTime> latency = m_config.topology.Latency(node, out.to);
        if (!latency) throw std::logic_error("message to a node that is not a peer");
        ScheduleDeliver(m_now + *latency, node, out.to, std::move(out.msg));
    }
    for (const BlockId& id : res.accepted_blocks) {
        if (!m_mined.count(id)) ++m_stats.untraceable_blocks;
    }
    for (const BlockObservation& obs : res.observations) Observe(node, obs);
    if (res.sync_fired) {
        ++m_stats.sync_fired[node];
        Log(node, "sync", {{"inv", std::to_string(res.sync_inventory)}});
    }
    for (const NodeNote& note : res.notes) Log(node, note.kind, {{"block", note.block.ToHex()}});
}

void World::OnTxArrival()
{
    const ArrivalConfig& a = m_config.arrivals;
    Push(m_now + 1 + SimTime(m_tx_rng.Exponential(MeanTxGapMillis(a))), EventKind::TX_ARRIVAL, 0, 0);

    // Same number of draws on every path so the stream stays aligned across configurations.
    const uint64_t pick = m_tx_rng.Next();
    const bool wants_parent = m_tx_rng.Bernoulli(a.parent_probability);
    const size_t parent_slot = size_t(m_tx_rng.UniformInt(0, RECENT_TXS - 1));
    const TxId id = MakeTxId(m_config.seed, m_tx_counter++);

    std::vector<NodeId> online;
    for (NodeId n = 0; n < m_nodes.size(); ++n) {
        if (m_online[n]) online.push_back(n);
    }
    std::vector<TxId> parents;
    NodeId origin = online.empty() ? 0 : online[pick % online.size()];
    const TxId& parent = m_recent[parent_slot];
    if (!online.empty() && wants_parent && !parent.IsNull() && m_nodes[origin].GetMempool().Contains(parent)) {
        parents.push_back(parent);
    }
    TxRef tx = DrawTransaction(m_tx_rng, a, id, m_now, std::move(parents));
    if (online.empty()) return;
    m_recent[m_recent_pos] = id;
    m_recent_pos = (m_recent_pos + 1) % RECENT_TXS;
    ++m_stats.txs_created;
    Dispatch(origin, m_nodes[origin].SubmitTransaction(std::move(tx), m_now));
}

void World::OnMineBlock()
{
    if (!m_mining) return;
    Node& miner = m_nodes[m_config.miner];
    const SimTime cutoff = m_now - m_config.template_delay;
    Block block = miner.GetMempool().AssembleBlock(m_config.max_block_txs, miner.Tip(), miner.TipHeight() + 1,
                                                   [cutoff](const Transaction& tx) { return tx.created_at <= cutoff; });
    std::vector<TxRef> txs;
    txs.reserve(block.txs.size());
    for (const TxId& id : block.txs) txs.push_back(miner.GetMempool().Get(id));
    const BlockId id = block.id;
    const int64_t height = block.height;
    FullBlockRef full = MakeFullBlock(std::move(block), std::move(txs));
    m_mined.insert(id);
    m_mined_order.push_back(id);
    ++m_stats.blocks_mined;
    Log(m_config.miner, "block_mined",
        {{"block", id.ToHex()}, {"height", std::to_string(height)}, {"txs", std::to_string(full->txs.size())},
         {"mempool", std::to_string(miner.GetMempool().Size())}});
    Dispatch(m_config.miner, miner.SubmitBlock(full, m_now));

    if (m_bound.blocks > 0 && m_stats.blocks_mined >= m_bound.blocks) {
        m_mining = false;
        m_stop_at = m_now + m_bound.drain;
        return;
    }
    const ArrivalConfig& a = m_config.arrivals;
    const double block_mean = a.block_interval_mean * 1000.0 / a.time_scale;
    Push(m_now + 1 + SimTime(m_block_rng.Exponential(block_mean)), EventKind::MINE_BLOCK, m_config.miner,
         m_config.miner);
}

void World::OnNodeDown(NodeId node)
{
    const ChurnSchedule* schedule = nullptr;
    for (const ChurnSchedule& s : m_config.churn) {
        if (s.node == node) schedule = &s;
    }
    if (m_online[node]) {
        m_online[node] = false;
        std::vector<BlockObservation> abandoned = m_nodes[node].Disconnect(m_now);
        for (const BlockObservation& obs : abandoned) Observe(node, obs);
        Log(node, "node_down", {{"abandoned", std::to_string(abandoned.size())}});
    }
    if (schedule) Push(ChurnNextTransition(*schedule, m_now), EventKind::NODE_UP, node, node);
}

void World::OnNodeUp(NodeId node)
{
    const ChurnSchedule* schedule = nullptr;
    for (const ChurnSchedule& s : m_config.churn) {
        if (s.node == node) schedule = &s;
    }
    if (!m_online[node]) {
        m_online[node] = true;
        Log(node, "node_up", {{"lost", std::to_string(m_lost_while_down[node])}});
        m_lost_while_down[node] = 0;
    }
    if (schedule) {
        SimTime next = ChurnNextTransition(*schedule, m_now);
        if (next != std::numeric_limits<SimTime>::max()) Push(next, EventKind::NODE_DOWN, node, node);
    }
}

void World::Run(const RunBound& bound)
{
    m_bound = bound;
    if (bound.blocks > 0 && m_stats.blocks_mined >= bound.blocks) {
        m_mining = false;
        if (!m_stop_at) m_stop_at = m_now;
    }
    while (!m_queue.empty()) {
        const Event& top = m_queue.top();
        if (top.time > bound.until) break;
        if (m_stop_at && top.time > *m_stop_at) break;
        Event ev = top;
        m_queue.pop();
        if (ev.time < ev.scheduled_at) ++m_stats.causality_violations;
        m_now = ev.time;
        ++m_stats.events;
        Mix(uint64_t(ev.time));
        Mix(ev.seq);
        Mix(uint64_t(ev.kind) << 48 | uint64_t(ev.a) << 24 | ev.b);

        switch (ev.kind) {
        case EventKind::DELIVER: {
            const NodeId from = ev.a, to = ev.b;
            if (!m_online[to] || !m_online[from]) {
                ++m_stats.dropped;
                if (!m_online[to]) ++m_lost_while_down[to];
                break;
            }
            Mix(ev.msg->index());
            ++m_stats.delivered;
            ++m_stats.incoming[to];
            m_bandwidth.Record(from, to, *ev.msg);
            if (m_config.record_trace) m_trace.push_back({from, to, ev.msg});
            if (on_handle) on_handle(m_now, from, to, *ev.msg);
            if (!m_online[to]) ++m_stats.offline_handled;
            Dispatch(to, m_nodes[to].Receive(from, *ev.msg, m_now));
            break;
        }
        case EventKind::NODE_DOWN:
            OnNodeDown(ev.a);
            break;
        case EventKind::NODE_UP:
            OnNodeUp(ev.a);
            break;
        case EventKind::MINE_BLOCK:
            OnMineBlock();
            break;
        case EventKind::TX_ARRIVAL:
            OnTxArrival();
            break;
        case EventKind::INV_FLUSH:
            if (m_online[ev.a]) Dispatch(ev.a, m_nodes[ev.a].FlushInventory(m_now));
            Push(m_now + 1 + SimTime(m_trickle_rng.Exponential(double(m_config.inv_interval))), EventKind::INV_FLUSH,
                 ev.a, ev.a);
            break;
        case EventKind::INJECT_TX:
            if (m_online[ev.a]) {
                ++m_stats.txs_created;
                Dispatch(ev.a, m_nodes[ev.a].SubmitTransaction(ev.tx, m_now));
            }
            break;
        }
    }
}

std::vector<BlockOutcome> World::OutcomesFor(NodeId node) const
{
    std::vector<BlockOutcome> out;
    for (const BlockOutcome& o : m_outcomes) {
        if (o.node == node) out.push_back(o);
    }
    return out;
}

} // namespace churnsim
