// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/node.h>

#include <algorithm>
#include <stdexcept>

namespace churnsim {

std::string_view RelayModeName(RelayMode mode)
{
    switch (mode) {
    case RelayMode::LEGACY: return "legacy";
    case RelayMode::COMPACT: return "compact";
    case RelayMode::GRAPHENE: return "graphene";
    }
    return "unknown";
}

std::optional<RelayMode> ParseRelayMode(std::string_view name)
{
    if (name == "legacy") return RelayMode::LEGACY;
    if (name == "compact") return RelayMode::COMPACT;
    if (name == "graphene") return RelayMode::GRAPHENE;
    return std::nullopt;
}

std::string_view GrapheneModelName(GrapheneModel model)
{
    return model == GrapheneModel::IBLT ? "iblt" : "threshold";
}

std::optional<GrapheneModel> ParseGrapheneModel(std::string_view name)
{
    if (name == "threshold") return GrapheneModel::THRESHOLD;
    if (name == "iblt") return GrapheneModel::IBLT;
    return std::nullopt;
}

Node::Node(NodeId id, RelayConfig config, Mempool::Options mempool_options)
    : m_id{id}, m_config{std::move(config)}, m_mempool{mempool_options}
{
}

void Node::AddPeer(NodeId peer, bool outbound)
{
    if (peer == m_id) throw std::invalid_argument("node cannot peer with itself");
    if (int slot = Slot(peer); slot >= 0) {
        m_peers[slot].outbound = m_peers[slot].outbound || outbound;
        return;
    }
    if (m_peers.size() >= MAX_PEERS) throw std::length_error("too many peers");
    if (m_slot_of.size() <= peer) m_slot_of.resize(size_t{peer} + 1, -1);
    m_slot_of[peer] = int(m_peers.size());
    m_peers.push_back({peer, outbound});
    m_inv_queue.emplace_back();
}

int Node::Slot(NodeId peer) const
{
    return peer < m_slot_of.size() ? m_slot_of[peer] : -1;
}

void Node::MarkPeerHasTx(NodeId peer, const TxId& id)
{
    if (int slot = Slot(peer); slot >= 0) m_seen_inventory[id].set(slot);
}

void Node::MarkPeerHasBlock(NodeId peer, const BlockId& id)
{
    if (int slot = Slot(peer); slot >= 0) m_block_inventory[id].set(slot);
}

bool Node::PeerKnowsTx(NodeId peer, const TxId& id) const
{
    int slot = Slot(peer);
    if (slot < 0) return false;
    auto it = m_seen_inventory.find(id);
    return it != m_seen_inventory.end() && it->second.test(slot);
}

FullBlockRef Node::FindBlock(const BlockId& id) const
{
    auto it = m_known_blocks.find(id);
    return it == m_known_blocks.end() ? nullptr : it->second;
}

void Node::Send(HandleResult& res, NodeId to, MessageRef msg)
{
    res.out.push_back({to, std::move(msg)});
}

HandleResult Node::Receive(NodeId from, const Message& msg, SimTime now)
{
    HandleResult res;
    if (from != SELF_PEER && FalafelOnIncoming(m_trigger)) RunSync(res);
    HandleInto(res, from, msg, now);
    return res;
}

HandleResult Node::HandleMessage(NodeId from, const Message& msg, SimTime now)
{
    HandleResult res;
    HandleInto(res, from, msg, now);
    return res;
}

void Node::HandleInto(HandleResult& res, NodeId from, const Message& msg, SimTime now)
{
    m_incoming_bytes = WireSize(msg);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, InvMsg>) OnInv(res, from, m, now);
            else if constexpr (std::is_same_v<T, GetDataMsg>) OnGetData(res, from, m);
            else if constexpr (std::is_same_v<T, TxMsg>) OnTx(res, from, m, now);
            else if constexpr (std::is_same_v<T, BlockAnnounceMsg>) OnBlockAnnounce(res, from, m);
            else if constexpr (std::is_same_v<T, GetBlockMsg>) OnGetBlock(res, from, m);
            else if constexpr (std::is_same_v<T, BlockMsg>) OnBlock(res, from, m, now);
            else if constexpr (std::is_same_v<T, CmpctBlockMsg>) OnCmpctBlock(res, from, m, now);
            else if constexpr (std::is_same_v<T, GetBlockTxnMsg>) OnGetBlockTxn(res, from, m);
            else if constexpr (std::is_same_v<T, BlockTxnMsg>) OnBlockTxn(res, from, m, now);
            else if constexpr (std::is_same_v<T, GrapheneMsg>) OnGraphene(res, from, m, now);
            else if constexpr (std::is_same_v<T, GetGrapheneLargerMsg>) OnGetGrapheneLarger(res, from, m);
            else if constexpr (std::is_same_v<T, GetGrapheneTxnMsg>) OnGetGrapheneTxn(res, from, m);
            else if constexpr (std::is_same_v<T, GrapheneTxnMsg>) OnGrapheneTxn(res, from, m, now);
            else if constexpr (std::is_same_v<T, TxMempoolSyncMsg>) RunSync(res);
        },
        msg);
}

//
// Transaction gossip
//

void Node::AnnounceTxs(HandleResult& res, const std::vector<TxId>& ids)
{
    if (ids.empty() || m_peers.empty()) return;
    std::vector<PeerMask> masks;
    masks.reserve(ids.size());
    for (const TxId& id : ids) {
        auto it = m_seen_inventory.find(id);
        masks.push_back(it == m_seen_inventory.end() ? PeerMask{} : it->second);
    }
    for (size_t slot = 0; slot < m_peers.size(); ++slot) {
        if (m_config.trickle_inventory) {
            for (size_t i = 0; i < ids.size(); ++i) {
                if (!masks[i].test(slot)) m_inv_queue[slot].push_back(ids[i]);
            }
            continue;
        }
        InvMsg inv;
        for (size_t i = 0; i < ids.size(); ++i) {
            if (!masks[i].test(slot)) inv.ids.push_back(ids[i]);
        }
        if (inv.ids.empty()) continue;
        // Announcing counts as the peer knowing it; avoids echo from both sides.
        for (const TxId& id : inv.ids) m_seen_inventory[id].set(slot);
        Send(res, m_peers[slot].id, MakeMessage(std::move(inv)));
    }
}

HandleResult Node::FlushInventory(SimTime now)
{
    HandleResult res;
    for (size_t slot = 0; slot < m_peers.size(); ++slot) {
        std::vector<TxId>& queue = m_inv_queue[slot];
        if (queue.empty()) continue;
        InvMsg inv;
        for (const TxId& id : queue) {
            if (!m_mempool.Contains(id)) continue;
            PeerMask& mask = m_seen_inventory[id];
            if (mask.test(slot)) continue;
            mask.set(slot);
            inv.ids.push_back(id);
        }
        queue.clear();
        if (!inv.ids.empty()) Send(res, m_peers[slot].id, MakeMessage(std::move(inv)));
    }
    (void)now;
    return res;
}

void Node::RequestTxs(HandleResult& res, NodeId from, const std::vector<TxId>& ids, SimTime now)
{
    GetDataMsg req;
    for (const TxId& id : ids) {
        if (m_mempool.Knows(id)) continue;
        auto it = m_tx_requests.find(id);
        if (it != m_tx_requests.end() && now - it->second.sent < m_config.tx_request_timeout) continue;
        m_tx_requests[id] = {from, now};
        req.ids.push_back(id);
    }
    if (!req.ids.empty()) Send(res, from, MakeMessage(std::move(req)));
}

void Node::OnInv(HandleResult& res, NodeId from, const InvMsg& m, SimTime now)
{
    for (const TxId& id : m.ids) MarkPeerHasTx(from, id);
    RequestTxs(res, from, m.ids, now);
}

void Node::OnGetData(HandleResult& res, NodeId from, const GetDataMsg& m)
{
    for (const TxId& id : m.ids) {
        TxRef tx = m_mempool.Get(id);
        if (!tx) continue;
        MarkPeerHasTx(from, id);
        Send(res, from, MakeMessage(TxMsg{std::move(tx)}));
    }
}

void Node::OnTx(HandleResult& res, NodeId from, const TxMsg& m, SimTime now)
{
    const TxId& id = m.tx->id;
    MarkPeerHasTx(from, id);
    m_tx_requests.erase(id);
    InsertResult r = m_mempool.Insert(m.tx);
    switch (r.outcome) {
    case InsertOutcome::ACCEPTED:
        AnnounceTxs(res, r.accepted);
        break;
    case InsertOutcome::ORPHANED:
        RequestTxs(res, from, m_mempool.MissingParents(id), now);
        break;
    case InsertOutcome::DUPLICATE:
        break;
    }
}

HandleResult Node::SubmitTransaction(TxRef tx, SimTime now)
{
    HandleResult res;
    m_tx_requests.erase(tx->id);
    InsertResult r = m_mempool.Insert(std::move(tx));
    if (r.outcome == InsertOutcome::ACCEPTED) AnnounceTxs(res, r.accepted);
    (void)now;
    return res;
}

void Node::RunSync(HandleResult& res)
{
    std::vector<TxId> ids = FalafelSelect(m_mempool);
    res.sync_fired = true;
    res.sync_inventory = ids.size();
    if (ids.empty()) return;
    MessageRef shared;
    for (size_t slot = 0; slot < m_peers.size(); ++slot) {
        if (m_config.sync_outbound_only && !m_peers[slot].outbound) continue;
        if (m_config.sync_filter_seen) {
            InvMsg inv{{}, true};
            for (const TxId& id : ids) {
                auto it = m_seen_inventory.find(id);
                if (it == m_seen_inventory.end() || !it->second.test(slot)) inv.ids.push_back(id);
            }
            if (!inv.ids.empty()) Send(res, m_peers[slot].id, MakeMessage(std::move(inv)));
            continue;
        }
        if (!shared) shared = MakeMessage(InvMsg{ids, true});
        Send(res, m_peers[slot].id, shared);
    }
}

//
// Blocks
//

bool Node::VerifyBlockId(const FullBlock& block) const
{
    if (block.txs.size() != block.block.txs.size()) return false;
    for (size_t i = 0; i < block.txs.size(); ++i) {
        if (!block.txs[i] || block.txs[i]->id != block.block.txs[i]) return false;
    }
    return ComputeBlockId(block.block.prev, block.block.height, block.block.txs) == block.block.id;
}

void Node::AcceptBlock(HandleResult& res, const FullBlockRef& block, NodeId from, bool relay, SimTime now)
{
    const Block& b = block->block;
    if (m_known_blocks.count(b.id)) return;
    m_known_blocks.emplace(b.id, block);
    m_body_order.push_back(b.id);
    while (m_body_order.size() > m_config.block_body_retention) {
        m_known_blocks[m_body_order.front()] = nullptr;
        m_body_order.pop_front();
    }
    m_catchup_requested.erase(b.id);

    std::vector<TxId> promoted;
    m_mempool.RemoveConfirmed(b, &promoted);
    for (const TxId& id : b.txs) {
        m_seen_inventory.erase(id);
        m_tx_requests.erase(id);
    }
    if (b.height > m_tip_height || m_tip.IsNull()) {
        m_tip = b.id;
        m_tip_height = b.height;
    }
    res.accepted_blocks.push_back(b.id);
    AnnounceTxs(res, promoted);
    if (relay) RelayBlock(res, *block);

    // Fill a gap left by a missed block so its transactions leave the pool too.
    if (from != SELF_PEER && !KnowsBlock(b.prev) && !m_catchup_requested.count(b.prev)) {
        m_catchup_requested.insert(b.prev);
        Send(res, from, MakeMessage(GetBlockMsg{b.prev}));
    }
    (void)now;
}

std::shared_ptr<const GrapheneBlock> Node::EncodeGraphene(const FullBlock& block, size_t cells) const
{
    const uint64_t seed = SipHash(m_id, 1, block.block.id);
    const size_t receiver_size = m_mempool.Size() + block.block.txs.size();
    return std::make_shared<const GrapheneBlock>(
        MakeGraphene(block.block, receiver_size, m_config.graphene, seed, cells));
}

void Node::RelayBlock(HandleResult& res, const FullBlock& block)
{
    const BlockId& id = block.block.id;
    PeerMask have;
    if (auto it = m_block_inventory.find(id); it != m_block_inventory.end()) have = it->second;

    MessageRef msg;
    switch (m_config.mode) {
    case RelayMode::LEGACY:
        msg = MakeMessage(BlockAnnounceMsg{id});
        break;
    case RelayMode::COMPACT: {
        const uint64_t salt = SipHash(m_id, 0, id);
        msg = MakeMessage(CmpctBlockMsg{
            std::make_shared<const CompactBlock>(MakeCompactBlock(block, salt, m_config.short_id_bytes))});
        break;
    }
    case RelayMode::GRAPHENE:
        if (block.txs.empty()) {
            msg = MakeMessage(BlockMsg{std::make_shared<const FullBlock>(block)});
        } else {
            msg = MakeMessage(GrapheneMsg{EncodeGraphene(block, 0)});
        }
        break;
    }
    for (size_t slot = 0; slot < m_peers.size(); ++slot) {
        if (have.test(slot)) continue;
        have.set(slot);
        Send(res, m_peers[slot].id, msg);
    }
    m_block_inventory[id] = have;
}

HandleResult Node::SubmitBlock(FullBlockRef block, SimTime now)
{
    HandleResult res;
    AcceptBlock(res, block, SELF_PEER, true, now);
    return res;
}

void Node::FinishObservation(HandleResult& res, BlockObservation obs)
{
    res.observations.push_back(std::move(obs));
}

namespace {

BlockObservation StartObservation(const BlockId& id, int64_t height, RelayMode mode, NodeId from, uint64_t bytes_down)
{
    BlockObservation obs;
    obs.block_id = id;
    obs.height = height;
    obs.protocol = mode;
    obs.source = from;
    obs.bytes_down = bytes_down;
    return obs;
}

} // namespace

/**
 * A block already being reconstructed was announced again. If the original
 * source has gone quiet for longer than the request timeout, ask the new
 * announcer for the full block.
 */
template <typename Pending>
static bool RetryStalled(Pending& pending, NodeId from, SimTime now, SimTime timeout, const BlockId& id,
                         std::vector<Outgoing>& out)
{
    if (pending.full_requested || now - pending.started < timeout || from == pending.peer) return false;
    pending.full_requested = true;
    pending.peer = from;
    pending.obs.round_trips += 1;
    MessageRef req = MakeMessage(GetBlockMsg{id});
    pending.obs.bytes_up += WireSize(*req);
    out.push_back({from, std::move(req)});
    return true;
}

void Node::OnBlockAnnounce(HandleResult& res, NodeId from, const BlockAnnounceMsg& m)
{
    MarkPeerHasBlock(from, m.id);
    if (KnowsBlock(m.id) || m_pending_legacy.count(m.id)) return;
    PendingLegacy pending{from, StartObservation(m.id, 0, RelayMode::LEGACY, from, m_incoming_bytes)};
    MessageRef req = MakeMessage(GetBlockMsg{m.id});
    pending.obs.bytes_up += WireSize(*req);
    m_pending_legacy.emplace(m.id, std::move(pending));
    Send(res, from, std::move(req));
}

void Node::OnGetBlock(HandleResult& res, NodeId from, const GetBlockMsg& m)
{
    FullBlockRef block = FindBlock(m.id);
    if (!block) {
        res.notes.push_back({"unknown_block", m.id});
        return;
    }
    MarkPeerHasBlock(from, m.id);
    Send(res, from, MakeMessage(BlockMsg{std::move(block)}));
}

void Node::OnBlock(HandleResult& res, NodeId from, const BlockMsg& m, SimTime now)
{
    const FullBlockRef& block = m.block;
    const BlockId& id = block->block.id;
    MarkPeerHasBlock(from, id);
    if (KnowsBlock(id)) return;
    if (!VerifyBlockId(*block)) {
        res.notes.push_back({"bad_block", id});
        return;
    }
    const uint64_t bytes = m_incoming_bytes;

    if (auto it = m_pending_legacy.find(id); it != m_pending_legacy.end()) {
        BlockObservation obs = std::move(it->second.obs);
        m_pending_legacy.erase(it);
        obs.height = block->block.height;
        obs.bytes_down += bytes;
        obs.success = true;
        AcceptBlock(res, block, from, true, now);
        FinishObservation(res, std::move(obs));
        return;
    }
    if (auto it = m_pending_compact.find(id); it != m_pending_compact.end()) {
        BlockObservation obs = std::move(it->second.obs);
        m_pending_compact.erase(it);
        obs.bytes_down += bytes;
        AcceptBlock(res, block, from, true, now);
        FinishObservation(res, std::move(obs));
        return;
    }
    if (auto it = m_pending_graphene.find(id); it != m_pending_graphene.end()) {
        BlockObservation obs = std::move(it->second.obs);
        m_pending_graphene.erase(it);
        obs.bytes_down += bytes;
        AcceptBlock(res, block, from, true, now);
        FinishObservation(res, std::move(obs));
        return;
    }
    if (m_catchup_requested.count(id)) {
        AcceptBlock(res, block, from, false, now);
        return;
    }
    // Unsolicited full block, e.g. an empty block under Graphene relay.
    BlockObservation obs = StartObservation(id, block->block.height, m_config.mode, from, bytes);
    obs.success = true;
    AcceptBlock(res, block, from, true, now);
    FinishObservation(res, std::move(obs));
}

//
// Compact blocks
//

void Node::OnCmpctBlock(HandleResult& res, NodeId from, const CmpctBlockMsg& m, SimTime now)
{
    const CompactBlock& cb = *m.cb;
    MarkPeerHasBlock(from, cb.block_id);
    if (KnowsBlock(cb.block_id)) return;
    if (auto it = m_pending_compact.find(cb.block_id); it != m_pending_compact.end()) {
        RetryStalled(it->second, from, now, m_config.tx_request_timeout, cb.block_id, res.out);
        return;
    }

    PendingCompact pending;
    pending.cb = m.cb;
    pending.peer = from;
    pending.started = now;
    pending.obs = StartObservation(cb.block_id, cb.height, RelayMode::COMPACT, from, m_incoming_bytes);
    pending.partial = MatchCompact(cb, m_mempool);

    if (pending.partial.missing.empty()) {
        FullBlock full = CompletePartial(cb, std::move(pending.partial), {});
        if (VerifyBlockId(full)) {
            pending.obs.success = true;
            AcceptBlock(res, std::make_shared<const FullBlock>(std::move(full)), from, true, now);
            FinishObservation(res, std::move(pending.obs));
            return;
        }
        // A short id resolved to the wrong transaction.
        pending.full_requested = true;
        pending.obs.round_trips = 1;
        MessageRef req = MakeMessage(GetBlockMsg{cb.block_id});
        pending.obs.bytes_up += WireSize(*req);
        m_pending_compact.emplace(cb.block_id, std::move(pending));
        Send(res, from, std::move(req));
        return;
    }

    pending.obs.missing = uint32_t(pending.partial.missing.size());
    pending.obs.round_trips = 1;
    pending.obs.requested_indexes = pending.partial.missing;
    MessageRef req = MakeMessage(GetBlockTxnMsg{cb.block_id, pending.partial.missing});
    pending.obs.bytes_up += WireSize(*req);
    m_pending_compact.emplace(cb.block_id, std::move(pending));
    Send(res, from, std::move(req));
}

void Node::OnGetBlockTxn(HandleResult& res, NodeId from, const GetBlockTxnMsg& m)
{
    FullBlockRef block = FindBlock(m.id);
    if (!block) {
        res.notes.push_back({"unknown_block", m.id});
        return;
    }
    try {
        Send(res, from, MakeMessage(BlockTxnMsg{m.id, ServeBlockTxn(*block, m.indexes)}));
    } catch (const std::out_of_range&) {
        res.notes.push_back({"bad_getblocktxn", m.id});
    }
}

void Node::OnBlockTxn(HandleResult& res, NodeId from, const BlockTxnMsg& m, SimTime now)
{
    auto it = m_pending_compact.find(m.id);
    if (it == m_pending_compact.end() || it->second.full_requested) {
        if (!KnowsBlock(m.id)) res.notes.push_back({"unknown_block", m.id});
        return;
    }
    PendingCompact& pending = it->second;
    pending.obs.bytes_down += m_incoming_bytes;
    std::optional<FullBlock> full;
    try {
        full = CompletePartial(*pending.cb, pending.partial, m.txs);
    } catch (const std::invalid_argument&) {
    }
    if (full && VerifyBlockId(*full)) {
        BlockObservation obs = std::move(pending.obs);
        m_pending_compact.erase(it);
        AcceptBlock(res, std::make_shared<const FullBlock>(std::move(*full)), from, true, now);
        FinishObservation(res, std::move(obs));
        return;
    }
    pending.full_requested = true;
    pending.obs.round_trips += 1;
    MessageRef req = MakeMessage(GetBlockMsg{m.id});
    pending.obs.bytes_up += WireSize(*req);
    Send(res, from, std::move(req));
}

//
// Graphene
//

void Node::OnGraphene(HandleResult& res, NodeId from, const GrapheneMsg& m, SimTime now)
{
    const GrapheneBlock& gb = *m.gb;
    MarkPeerHasBlock(from, gb.block_id);
    if (KnowsBlock(gb.block_id)) return;
    const uint64_t bytes = m_incoming_bytes;

    if (auto it = m_pending_graphene.find(gb.block_id); it != m_pending_graphene.end()) {
        PendingGraphene& pending = it->second;
        if (pending.awaiting_larger && from == pending.peer && !pending.full_requested) {
            pending.awaiting_larger = false;
            pending.gb = m.gb;
            pending.cells = gb.sketch.CellCount();
            pending.obs.bytes_down += bytes;
            ContinueGraphene(res, gb.block_id, pending, now);
            return;
        }
        RetryStalled(pending, from, now, m_config.tx_request_timeout, gb.block_id, res.out);
        return;
    }

    PendingGraphene pending;
    pending.gb = m.gb;
    pending.peer = from;
    pending.started = now;
    pending.cells = gb.sketch.CellCount();
    pending.initial_cells = pending.cells;
    pending.obs = StartObservation(gb.block_id, gb.height, RelayMode::GRAPHENE, from, bytes);
    auto [pos, _] = m_pending_graphene.emplace(gb.block_id, std::move(pending));
    ContinueGraphene(res, gb.block_id, pos->second, now);
}

void Node::ContinueGraphene(HandleResult& res, const BlockId& id, PendingGraphene& pending, SimTime now)
{
    const GrapheneBlock& gb = *pending.gb;

    auto request_larger = [&]() {
        pending.obs.round_trips += 1;
        pending.obs.decode_failures += 1;
        pending.doublings += 1;
        MessageRef req;
        if (pending.doublings > m_config.max_sketch_doublings) {
            pending.full_requested = true;
            req = MakeMessage(GetBlockMsg{id});
        } else {
            pending.awaiting_larger = true;
            req = MakeMessage(GetGrapheneLargerMsg{id, uint32_t(GrapheneFallback(pending.cells))});
        }
        pending.obs.bytes_up += WireSize(*req);
        Send(res, pending.peer, std::move(req));
    };

    auto finish = [&](FullBlock full) {
        if (!VerifyBlockId(full)) {
            pending.full_requested = true;
            pending.obs.round_trips += 1;
            MessageRef req = MakeMessage(GetBlockMsg{id});
            pending.obs.bytes_up += WireSize(*req);
            Send(res, pending.peer, std::move(req));
            return;
        }
        BlockObservation obs = std::move(pending.obs);
        obs.success = obs.decode_failures == 0;
        NodeId from = pending.peer;
        m_pending_graphene.erase(id);
        AcceptBlock(res, std::make_shared<const FullBlock>(std::move(full)), from, true, now);
        FinishObservation(res, std::move(obs));
    };

    auto need = [&](std::vector<TxId> missing, std::vector<TxId> block_ids) {
        pending.obs.missing = uint32_t(missing.size());
        pending.obs.requested_ids = missing;
        pending.block_ids = std::move(block_ids);
        pending.awaiting_txn = true;
        MessageRef req = MakeMessage(GetGrapheneTxnMsg{id, std::move(missing)});
        pending.obs.bytes_up += WireSize(*req);
        Send(res, pending.peer, std::move(req));
    };

    if (m_config.graphene_model == GrapheneModel::THRESHOLD) {
        if (!gb.reference) throw std::logic_error("threshold model needs the block reference");
        // Each doubling doubles the tolerated difference.
        const double threshold =
            m_config.graphene_threshold * double(pending.cells) / double(std::max<size_t>(1, pending.initial_cells));
        if (!GrapheneThresholdOutcome(*gb.reference, m_mempool, threshold)) {
            request_larger();
            return;
        }
        std::vector<TxId> missing;
        for (const TxId& txid : gb.reference->txs) {
            if (!m_mempool.Find(txid)) missing.push_back(txid);
        }
        if (!missing.empty()) {
            need(std::move(missing), gb.reference->txs);
            return;
        }
        std::vector<TxRef> txs;
        txs.reserve(gb.reference->txs.size());
        for (const TxId& txid : gb.reference->txs) txs.push_back(m_mempool.Get(txid));
        finish(AssembleGrapheneBlock(gb, txs));
        return;
    }

    GrapheneResult result = ReconstructGraphene(gb, m_mempool);
    if (auto* ok = std::get_if<GrapheneReconstructed>(&result)) {
        finish(std::move(ok->block));
    } else if (auto* nt = std::get_if<GrapheneNeedTx>(&result)) {
        need(std::move(nt->missing), std::move(nt->block_ids));
    } else {
        request_larger();
    }
}

void Node::OnGetGrapheneLarger(HandleResult& res, NodeId from, const GetGrapheneLargerMsg& m)
{
    FullBlockRef block = FindBlock(m.id);
    if (!block || block->txs.empty()) {
        res.notes.push_back({"unknown_block", m.id});
        return;
    }
    Send(res, from, MakeMessage(GrapheneMsg{EncodeGraphene(*block, m.cell_count)}));
}

void Node::OnGetGrapheneTxn(HandleResult& res, NodeId from, const GetGrapheneTxnMsg& m)
{
    FullBlockRef block = FindBlock(m.id);
    if (!block) {
        res.notes.push_back({"unknown_block", m.id});
        return;
    }
    std::unordered_map<TxId, TxRef> by_id;
    by_id.reserve(block->txs.size());
    for (const TxRef& tx : block->txs) by_id.emplace(tx->id, tx);
    GrapheneTxnMsg reply{m.id, {}};
    for (const TxId& id : m.ids) {
        auto it = by_id.find(id);
        if (it != by_id.end()) reply.txs.push_back(it->second);
    }
    Send(res, from, MakeMessage(std::move(reply)));
}

void Node::OnGrapheneTxn(HandleResult& res, NodeId from, const GrapheneTxnMsg& m, SimTime now)
{
    auto it = m_pending_graphene.find(m.id);
    if (it == m_pending_graphene.end() || !it->second.awaiting_txn || it->second.full_requested) {
        if (!KnowsBlock(m.id)) res.notes.push_back({"unknown_block", m.id});
        return;
    }
    PendingGraphene& pending = it->second;
    pending.awaiting_txn = false;
    pending.obs.bytes_down += m_incoming_bytes;

    std::unordered_map<TxId, TxRef> delivered;
    for (const TxRef& tx : m.txs) delivered.emplace(tx->id, tx);
    std::vector<TxRef> txs;
    txs.reserve(pending.block_ids.size());
    bool complete = true;
    for (const TxId& id : pending.block_ids) {
        TxRef tx = m_mempool.Get(id);
        if (!tx) {
            auto d = delivered.find(id);
            if (d != delivered.end()) tx = d->second;
        }
        if (!tx) {
            complete = false;
            break;
        }
        txs.push_back(std::move(tx));
    }
    std::optional<FullBlock> full;
    if (complete) {
        try {
            full = AssembleGrapheneBlock(*pending.gb, txs);
        } catch (const std::exception&) {
        }
    }
    if (full && VerifyBlockId(*full)) {
        BlockObservation obs = std::move(pending.obs);
        obs.success = obs.decode_failures == 0;
        m_pending_graphene.erase(it);
        AcceptBlock(res, std::make_shared<const FullBlock>(std::move(*full)), from, true, now);
        FinishObservation(res, std::move(obs));
        return;
    }
    pending.full_requested = true;
    pending.obs.round_trips += 1;
    MessageRef req = MakeMessage(GetBlockMsg{m.id});
    pending.obs.bytes_up += WireSize(*req);
    Send(res, from, std::move(req));
}

//
// Connectivity
//

std::vector<BlockObservation> Node::Disconnect(SimTime now)
{
    std::vector<BlockObservation> out;
    auto abandon = [&](auto& pending_map) {
        for (auto& [id, pending] : pending_map) {
            BlockObservation obs = std::move(pending.obs);
            obs.success = false;
            obs.abandoned = true;
            out.push_back(std::move(obs));
        }
        pending_map.clear();
    };
    abandon(m_pending_compact);
    abandon(m_pending_graphene);
    abandon(m_pending_legacy);
    m_catchup_requested.clear();
    m_tx_requests.clear();
    for (auto& queue : m_inv_queue) queue.clear();
    // Deterministic output order regardless of hash-map iteration.
    std::sort(out.begin(), out.end(), [](const BlockObservation& a, const BlockObservation& b) {
        return std::tie(a.height, a.block_id) < std::tie(b.height, b.block_id);
    });
    (void)now;
    return out;
}

} // namespace churnsim
