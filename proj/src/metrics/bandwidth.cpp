// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/metrics.h>

namespace churnsim {

size_t BandwidthKind(const Message& msg)
{
    if (const auto* inv = std::get_if<InvMsg>(&msg); inv && inv->sync) return INV_SYNC_KIND;
    return msg.index();
}

std::string_view BandwidthKindName(size_t kind)
{
    if (kind == INV_SYNC_KIND) return "inv_sync";
    return MessageKindName(kind);
}

namespace {

/** Block id of a reconstruction fallback message, if it is one. */
const BlockId* FallbackBlock(const Message& msg)
{
    if (const auto* m = std::get_if<GetBlockTxnMsg>(&msg)) return &m->id;
    if (const auto* m = std::get_if<BlockTxnMsg>(&msg)) return &m->id;
    if (const auto* m = std::get_if<GetGrapheneLargerMsg>(&msg)) return &m->id;
    if (const auto* m = std::get_if<GetGrapheneTxnMsg>(&msg)) return &m->id;
    if (const auto* m = std::get_if<GrapheneTxnMsg>(&msg)) return &m->id;
    return nullptr;
}

} // namespace

void BandwidthLedger::Add(NodeId node, size_t kind, Direction dir, uint64_t bytes)
{
    if (kind >= BANDWIDTH_KIND_COUNT) throw std::out_of_range("bandwidth kind");
    if (m_nodes.size() <= node) m_nodes.resize(size_t{node} + 1, KindTable{});
    ByteCount& c = m_nodes[node][kind][dir == Direction::UP ? 0 : 1];
    c.bytes += bytes;
    c.count += 1;
}

void BandwidthLedger::Record(NodeId from, NodeId to, const Message& msg)
{
    const uint64_t bytes = WireSize(msg);
    const size_t kind = BandwidthKind(msg);
    Add(from, kind, Direction::UP, bytes);
    Add(to, kind, Direction::DOWN, bytes);
    if (const BlockId* id = FallbackBlock(msg)) m_fallback[*id] += bytes;
}

ByteCount BandwidthLedger::Get(NodeId node, size_t kind, Direction dir) const
{
    if (node >= m_nodes.size() || kind >= BANDWIDTH_KIND_COUNT) return {};
    return m_nodes[node][kind][dir == Direction::UP ? 0 : 1];
}

ByteCount BandwidthLedger::Total(NodeId node, Direction dir) const
{
    ByteCount total;
    for (size_t kind = 0; kind < BANDWIDTH_KIND_COUNT; ++kind) {
        ByteCount c = Get(node, kind, dir);
        total.bytes += c.bytes;
        total.count += c.count;
    }
    return total;
}

BandwidthLedger BandwidthReport(const std::vector<TraceMessage>& trace)
{
    BandwidthLedger ledger;
    for (const TraceMessage& t : trace) ledger.Record(t.from, t.to, *t.msg);
    return ledger;
}

} // namespace churnsim
