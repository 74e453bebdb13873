// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/relay.h>

#include <array>
#include <type_traits>

namespace churnsim {

namespace {
constexpr uint64_t HEADER_BYTES = 88;
constexpr uint64_t BLOCK_REF_BYTES = 40;

constexpr std::array<std::string_view, MESSAGE_KIND_COUNT> KIND_NAMES{
    "inv", "getdata", "tx", "blockannounce", "getblock", "block", "cmpctblock",
    "getblocktxn", "blocktxn", "graphene", "getgraphenelarger", "getgraphenetxn",
    "graphenetxn", "txmempoolsync",
};

template <class>
inline constexpr bool always_false_v = false;
} // namespace

FullBlockRef MakeFullBlock(Block block, std::vector<TxRef> txs)
{
    return std::make_shared<const FullBlock>(FullBlock{std::move(block), std::move(txs)});
}

uint64_t TxBytes(const std::vector<TxRef>& txs)
{
    uint64_t total = 0;
    for (const TxRef& tx : txs) total += tx->size_bytes;
    return total;
}

std::string_view MessageKindName(size_t kind_index) { return KIND_NAMES.at(kind_index); }

std::string_view MessageKindName(const Message& msg) { return KIND_NAMES[msg.index()]; }

uint64_t WireSize(const Message& msg)
{
    return std::visit(
        [](const auto& m) -> uint64_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, InvMsg>) {
                return 8 + 32 * m.ids.size();
            } else if constexpr (std::is_same_v<T, GetDataMsg>) {
                return 8 + 4 * m.ids.size();
            } else if constexpr (std::is_same_v<T, TxMsg>) {
                return m.tx->size_bytes;
            } else if constexpr (std::is_same_v<T, BlockAnnounceMsg> || std::is_same_v<T, GetBlockMsg>) {
                return BLOCK_REF_BYTES;
            } else if constexpr (std::is_same_v<T, BlockMsg>) {
                return HEADER_BYTES + TxBytes(m.block->txs);
            } else if constexpr (std::is_same_v<T, CmpctBlockMsg>) {
                uint64_t prefilled = 0;
                for (const PrefilledTx& p : m.cb->prefilled) prefilled += p.tx->size_bytes;
                return HEADER_BYTES + 8 + uint64_t{m.cb->short_id_bytes} * m.cb->short_ids.size() + prefilled;
            } else if constexpr (std::is_same_v<T, GetBlockTxnMsg>) {
                return BLOCK_REF_BYTES + 4 * m.indexes.size();
            } else if constexpr (std::is_same_v<T, BlockTxnMsg> || std::is_same_v<T, GrapheneTxnMsg>) {
                return BLOCK_REF_BYTES + TxBytes(m.txs);
            } else if constexpr (std::is_same_v<T, GrapheneMsg>) {
                return HEADER_BYTES + m.gb->filter.SerializedSize() + m.gb->sketch.SerializedSize();
            } else if constexpr (std::is_same_v<T, GetGrapheneLargerMsg>) {
                return 44;
            } else if constexpr (std::is_same_v<T, GetGrapheneTxnMsg>) {
                return BLOCK_REF_BYTES + 32 * m.ids.size();
            } else if constexpr (std::is_same_v<T, TxMempoolSyncMsg>) {
                // self-addressed, never crosses a link
                return 0;
            } else {
                static_assert(always_false_v<T>, "unpriced message");
            }
        },
        msg);
}

} // namespace churnsim
