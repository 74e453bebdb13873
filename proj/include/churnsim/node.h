// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_NODE_H
#define CHURNSIM_NODE_H

#include <churnsim/relay.h>
#include <churnsim/txpool.h>

#include <bitset>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace churnsim {

enum class RelayMode { LEGACY, COMPACT, GRAPHENE };
enum class GrapheneModel { THRESHOLD, IBLT };

std::string_view RelayModeName(RelayMode mode);
std::optional<RelayMode> ParseRelayMode(std::string_view name);
std::string_view GrapheneModelName(GrapheneModel model);
std::optional<GrapheneModel> ParseGrapheneModel(std::string_view name);

struct RelayConfig {
    RelayMode mode{RelayMode::COMPACT};
    GrapheneModel graphene_model{GrapheneModel::THRESHOLD};
    GrapheneParams graphene;
    /** Missing fraction above which the threshold model fails a first-size sketch. */
    double graphene_threshold{0.15};
    unsigned short_id_bytes{SHORT_ID_BYTES};
    /** Send sync inventories to outbound peers only. */
    bool sync_outbound_only{false};
    /** Drop ids a peer is already known to have from sync inventories. */
    bool sync_filter_seen{false};
    /** A getdata still unanswered after this long may be re-sent to another announcer. */
    SimTime tx_request_timeout{5000};
    /** Recent blocks whose bodies are kept for serving peers. */
    size_t block_body_retention{32};
    /** Queue transaction announcements until FlushInventory() instead of sending at once. */
    bool trickle_inventory{false};
    /** Larger-sketch requests before falling back to the full block. */
    unsigned max_sketch_doublings{8};
};

constexpr NodeId SELF_PEER = std::numeric_limits<NodeId>::max();
constexpr size_t MAX_PEERS = 128;
using PeerMask = std::bitset<MAX_PEERS>;

struct Outgoing {
    NodeId to;
    MessageRef msg;
};

/** Outcome of one announced block at one node. */
struct BlockObservation {
    BlockId block_id;
    int64_t height{0};
    RelayMode protocol{RelayMode::COMPACT};
    NodeId source{0};
    /** Reconstructed from the announcement alone. */
    bool success{false};
    uint32_t missing{0};
    uint32_t round_trips{0};
    /** Sketches that failed to decode (Graphene only). */
    uint32_t decode_failures{0};
    uint64_t bytes_down{0};
    uint64_t bytes_up{0};
    /** Reconstruction was cut short by a disconnect. */
    bool abandoned{false};
    std::vector<uint32_t> requested_indexes;
    std::vector<TxId> requested_ids;
};

struct NodeNote {
    std::string kind;
    BlockId block;
};

struct HandleResult {
    std::vector<Outgoing> out;
    std::vector<BlockObservation> observations;
    std::vector<BlockId> accepted_blocks;
    std::vector<NodeNote> notes;
    bool sync_fired{false};
    size_t sync_inventory{0};
};

/**
 * Per-node protocol state. Every entry point is a transition on this node
 * alone that returns the messages to send; delivery and timing belong to the
 * caller.
 */
class Node
{
public:
    Node(NodeId id, RelayConfig config, Mempool::Options mempool_options = {});

    /** Connections are bidirectional; `outbound` records who initiated. Duplicate adds are ignored. */
    void AddPeer(NodeId peer, bool outbound);

    /** Deliver one message from a peer, first advancing the sync pseudo-timer. */
    HandleResult Receive(NodeId from, const Message& msg, SimTime now);
    /** Process one message without touching the pseudo-timer. */
    HandleResult HandleMessage(NodeId from, const Message& msg, SimTime now);

    /** A transaction created at this node. */
    HandleResult SubmitTransaction(TxRef tx, SimTime now);
    /** A block assembled at this node. */
    HandleResult SubmitBlock(FullBlockRef block, SimTime now);

    /** Send queued announcements (trickle mode). */
    HandleResult FlushInventory(SimTime now);

    /** Connection loss: abandon in-flight reconstructions and requests. */
    std::vector<BlockObservation> Disconnect(SimTime now);

    NodeId Id() const { return m_id; }
    const RelayConfig& Config() const { return m_config; }
    Mempool& GetMempool() { return m_mempool; }
    const Mempool& GetMempool() const { return m_mempool; }
    SyncTrigger& Trigger() { return m_trigger; }
    const SyncTrigger& Trigger() const { return m_trigger; }

    const BlockId& Tip() const { return m_tip; }
    int64_t TipHeight() const { return m_tip_height; }
    bool KnowsBlock(const BlockId& id) const { return id.IsNull() || m_known_blocks.count(id) > 0; }
    /** nullptr if unknown or the body was pruned. */
    FullBlockRef FindBlock(const BlockId& id) const;

    struct Peer {
        NodeId id;
        bool outbound;
    };
    const std::vector<Peer>& Peers() const { return m_peers; }
    bool PeerKnowsTx(NodeId peer, const TxId& id) const;
    size_t PendingCount() const { return m_pending_compact.size() + m_pending_graphene.size() + m_pending_legacy.size(); }
    size_t InFlightTxRequests() const { return m_tx_requests.size(); }

private:
    struct PendingCompact {
        std::shared_ptr<const CompactBlock> cb;
        PartialBlock partial;
        NodeId peer;
        SimTime started{0};
        BlockObservation obs;
        bool full_requested{false};
    };
    struct PendingGraphene {
        std::shared_ptr<const GrapheneBlock> gb;
        NodeId peer;
        SimTime started{0};
        size_t cells{0};
        size_t initial_cells{0};
        unsigned doublings{0};
        std::vector<TxId> block_ids;
        BlockObservation obs;
        bool awaiting_larger{false};
        bool awaiting_txn{false};
        bool full_requested{false};
    };
    struct PendingLegacy {
        NodeId peer;
        BlockObservation obs;
    };
    struct TxRequest {
        NodeId peer;
        SimTime sent;
    };

    int Slot(NodeId peer) const;
    void MarkPeerHasTx(NodeId peer, const TxId& id);
    void MarkPeerHasBlock(NodeId peer, const BlockId& id);
    void Send(HandleResult& res, NodeId to, MessageRef msg);

    void HandleInto(HandleResult& res, NodeId from, const Message& msg, SimTime now);
    void OnInv(HandleResult& res, NodeId from, const InvMsg& m, SimTime now);
    void OnGetData(HandleResult& res, NodeId from, const GetDataMsg& m);
    void OnTx(HandleResult& res, NodeId from, const TxMsg& m, SimTime now);
    void OnBlockAnnounce(HandleResult& res, NodeId from, const BlockAnnounceMsg& m);
    void OnGetBlock(HandleResult& res, NodeId from, const GetBlockMsg& m);
    void OnBlock(HandleResult& res, NodeId from, const BlockMsg& m, SimTime now);
    void OnCmpctBlock(HandleResult& res, NodeId from, const CmpctBlockMsg& m, SimTime now);
    void OnGetBlockTxn(HandleResult& res, NodeId from, const GetBlockTxnMsg& m);
    void OnBlockTxn(HandleResult& res, NodeId from, const BlockTxnMsg& m, SimTime now);
    void OnGraphene(HandleResult& res, NodeId from, const GrapheneMsg& m, SimTime now);
    void OnGetGrapheneLarger(HandleResult& res, NodeId from, const GetGrapheneLargerMsg& m);
    void OnGetGrapheneTxn(HandleResult& res, NodeId from, const GetGrapheneTxnMsg& m);
    void OnGrapheneTxn(HandleResult& res, NodeId from, const GrapheneTxnMsg& m, SimTime now);
    void RunSync(HandleResult& res);

    void AnnounceTxs(HandleResult& res, const std::vector<TxId>& ids);
    void RequestTxs(HandleResult& res, NodeId from, const std::vector<TxId>& ids, SimTime now);
    /** Store, confirm, and (when announced) relay a block. */
    void AcceptBlock(HandleResult& res, const FullBlockRef& block, NodeId from, bool relay, SimTime now);
    void RelayBlock(HandleResult& res, const FullBlock& block);
    std::shared_ptr<const GrapheneBlock> EncodeGraphene(const FullBlock& block, size_t cells) const;
    void ContinueGraphene(HandleResult& res, const BlockId& id, PendingGraphene& pending, SimTime now);
    void FinishObservation(HandleResult& res, BlockObservation obs);
    bool VerifyBlockId(const FullBlock& block) const;

    NodeId m_id;
    RelayConfig m_config;
    /** Wire size of the message being handled. */
    uint64_t m_incoming_bytes{0};
    Mempool m_mempool;
    SyncTrigger m_trigger;

    std::vector<Peer> m_peers;
    std::vector<int> m_slot_of;

    BlockId m_tip;
    int64_t m_tip_height{0};
    /** Known blocks; the body is dropped once the block leaves the retention window. */
    std::unordered_map<BlockId, FullBlockRef> m_known_blocks;
    std::deque<BlockId> m_body_order;
    std::unordered_map<BlockId, PeerMask> m_block_inventory;

    std::unordered_map<BlockId, PendingCompact> m_pending_compact;
    std::unordered_map<BlockId, PendingGraphene> m_pending_graphene;
    std::unordered_map<BlockId, PendingLegacy> m_pending_legacy;
    std::unordered_set<BlockId> m_catchup_requested;

    std::unordered_map<TxId, PeerMask> m_seen_inventory;
    /** Per peer slot, ids waiting for the next trickle. */
    std::vector<std::vector<TxId>> m_inv_queue;
    std::unordered_map<TxId, TxRequest> m_tx_requests;
};

} // namespace churnsim

#endif // CHURNSIM_NODE_H
