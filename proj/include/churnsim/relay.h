// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_RELAY_H
#define CHURNSIM_RELAY_H

#include <churnsim/sketches.h>
#include <churnsim/txpool.h>
#include <churnsim/types.h>

#include <cstdint>
#include <memory>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace churnsim {

/** A block together with the bodies of its transactions, in block order. */
struct FullBlock {
    Block block;
    std::vector<TxRef> txs;
};
using FullBlockRef = std::shared_ptr<const FullBlock>;

FullBlockRef MakeFullBlock(Block block, std::vector<TxRef> txs);

//
// Compact blocks
//

/** Truncated keyed hash of a TxId, stored in the low `width` bytes. */
struct ShortId {
    uint64_t value{0};
    auto operator<=>(const ShortId&) const = default;
};

constexpr unsigned SHORT_ID_BYTES = 6;

ShortId MakeShortId(const TxId& id, uint64_t salt, unsigned width_bytes = SHORT_ID_BYTES);

struct PrefilledTx {
    uint32_t index;
    TxRef tx;
};

struct CompactBlock {
    BlockId block_id;
    int64_t height{0};
    BlockId prev_id;
    uint64_t salt{0};
    unsigned short_id_bytes{SHORT_ID_BYTES};
    /** Block order with prefilled positions skipped. */
    std::vector<ShortId> short_ids;
    std::vector<PrefilledTx> prefilled;

    size_t TxCount() const { return short_ids.size() + prefilled.size(); }
};

/** Prefills the first transaction. Throws std::out_of_range if a body is missing from `txs`. */
CompactBlock MakeCompactBlock(const Block& block, const std::unordered_map<TxId, TxRef>& txs, uint64_t salt,
                              unsigned short_id_bytes = SHORT_ID_BYTES);
CompactBlock MakeCompactBlock(const FullBlock& block, uint64_t salt, unsigned short_id_bytes = SHORT_ID_BYTES);

/** Partially matched compact block: one slot per block position. */
struct PartialBlock {
    std::vector<TxRef> slots;
    /** Unmatched or ambiguous positions, ascending. */
    std::vector<uint32_t> missing;
};

struct NeedTxn {
    std::vector<uint32_t> indexes;
};

/** Match short ids against the pool. Reconstructed iff every id matches exactly one pool entry. */
std::variant<FullBlock, NeedTxn> ReconstructCompact(const CompactBlock& cb, const Mempool& mempool);
PartialBlock MatchCompact(const CompactBlock& cb, const Mempool& mempool);

/** Fill the missing slots in order. Throws std::invalid_argument on a count mismatch. */
FullBlock CompletePartial(const CompactBlock& cb, PartialBlock partial, const std::vector<TxRef>& txs);

/** Transactions at the given positions, in index order. Throws std::out_of_range. */
std::vector<TxRef> ServeBlockTxn(const FullBlock& block, const std::vector<uint32_t>& indexes);

//
// Graphene
//

struct GrapheneParams {
    double fpr{0.001};
    double cell_multiplier{1.5};
    size_t min_cells{30};
    size_t slack{10};
    unsigned hash_count{Iblt::DEFAULT_HASH_COUNT};
};

/** max(min_cells, ceil(alpha * (max(1, ceil(fpr * receiver_mempool_size)) + slack))) */
size_t GrapheneCellCount(size_t receiver_mempool_size, const GrapheneParams& params);

struct GrapheneBlock {
    BlockId block_id;
    int64_t height{0};
    BlockId prev_id;
    uint32_t tx_count{0};
    BloomFilter filter;
    Iblt sketch;
    /**
     * The encoded block as known to the simulator. Not part of the wire
     * encoding; read only by the threshold outcome model.
     */
    std::shared_ptr<const Block> reference;
};

/** Throws std::invalid_argument for an empty block. */
GrapheneBlock MakeGraphene(const Block& block, size_t receiver_mempool_size, const GrapheneParams& params,
                           uint64_t seed, size_t cell_count_override = 0);

struct GrapheneReconstructed {
    FullBlock block;
};
struct GrapheneDecodeFail {};
struct GrapheneNeedTx {
    /** Block ids the receiver does not hold. */
    std::vector<TxId> missing;
    /** Decoded block id set (held and missing). */
    std::vector<TxId> block_ids;
};
using GrapheneResult = std::variant<GrapheneReconstructed, GrapheneDecodeFail, GrapheneNeedTx>;

/** Transactions of a Graphene block are ordered canonically (see CanonicalOrder). */
GrapheneResult ReconstructGraphene(const GrapheneBlock& gb, const Mempool& mempool);

/** Canonically ordered block from a complete set of bodies. */
FullBlock AssembleGrapheneBlock(const GrapheneBlock& gb, const std::vector<TxRef>& txs);

/** Cell count requested after a decode failure. */
inline size_t GrapheneFallback(size_t prior_cells) { return 2 * prior_cells; }

/** False iff more than `threshold` of the block's transactions are absent from the pool. */
bool GrapheneThresholdOutcome(const Block& block, const Mempool& mempool, double threshold = 0.15);

//
// FalafelSync
//

/** min(n, max(ceil(n / 10), 1000)) */
size_t FalafelSelectCount(size_t mempool_size);
std::vector<TxId> FalafelSelect(const Mempool& mempool);

/** Pseudo-timer counting incoming messages. */
struct SyncTrigger {
    bool enabled{false};
    uint64_t limit{1};
    uint64_t counter{0};
};

/** Count one incoming message. Returns true when a sync round should run now. */
bool FalafelOnIncoming(SyncTrigger& trigger);

//
// Messages
//

struct InvMsg {
    std::vector<TxId> ids;
    /** Set on inventories produced by a sync round; same wire format. */
    bool sync{false};
};
struct GetDataMsg {
    std::vector<TxId> ids;
};
struct TxMsg {
    TxRef tx;
};
struct BlockAnnounceMsg {
    BlockId id;
};
struct GetBlockMsg {
    BlockId id;
};
struct BlockMsg {
    FullBlockRef block;
};
struct CmpctBlockMsg {
    std::shared_ptr<const CompactBlock> cb;
};
struct GetBlockTxnMsg {
    BlockId id;
    std::vector<uint32_t> indexes;
};
struct BlockTxnMsg {
    BlockId id;
    std::vector<TxRef> txs;
};
struct GrapheneMsg {
    std::shared_ptr<const GrapheneBlock> gb;
};
struct GetGrapheneLargerMsg {
    BlockId id;
    uint32_t cell_count{0};
};
struct GetGrapheneTxnMsg {
    BlockId id;
    std::vector<TxId> ids;
};
struct GrapheneTxnMsg {
    BlockId id;
    std::vector<TxRef> txs;
};
struct TxMempoolSyncMsg {
};

using Message = std::variant<InvMsg, GetDataMsg, TxMsg, BlockAnnounceMsg, GetBlockMsg, BlockMsg, CmpctBlockMsg,
                             GetBlockTxnMsg, BlockTxnMsg, GrapheneMsg, GetGrapheneLargerMsg, GetGrapheneTxnMsg,
                             GrapheneTxnMsg, TxMempoolSyncMsg>;
using MessageRef = std::shared_ptr<const Message>;

template <typename T>
MessageRef MakeMessage(T&& m)
{
    return std::make_shared<const Message>(std::forward<T>(m));
}

constexpr size_t MESSAGE_KIND_COUNT = std::variant_size_v<Message>;

/** Wire name of the variant, e.g. "inv", "cmpctblock". */
std::string_view MessageKindName(size_t kind_index);
std::string_view MessageKindName(const Message& msg);

/** Byte cost of a message under the relay byte model. */
uint64_t WireSize(const Message& msg);

uint64_t TxBytes(const std::vector<TxRef>& txs);

} // namespace churnsim

#endif // CHURNSIM_RELAY_H
