// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/relay.h>

#include <stdexcept>

namespace churnsim {

ShortId MakeShortId(const TxId& id, uint64_t salt, unsigned width_bytes)
{
    if (width_bytes == 0 || width_bytes > 8) throw std::invalid_argument("short id width must be 1..8 bytes");
    uint64_t h = SipHash(salt, ~salt, id);
    if (width_bytes < 8) h &= (uint64_t{1} << (8 * width_bytes)) - 1;
    return ShortId{h};
}

namespace {
CompactBlock CompactHeader(const Block& block, uint64_t salt, unsigned short_id_bytes)
{
    CompactBlock cb;
    cb.block_id = block.id;
    cb.height = block.height;
    cb.prev_id = block.prev;
    cb.salt = salt;
    cb.short_id_bytes = short_id_bytes;
    return cb;
}
} // namespace

CompactBlock MakeCompactBlock(const Block& block, const std::unordered_map<TxId, TxRef>& txs, uint64_t salt,
                              unsigned short_id_bytes)
{
    CompactBlock cb = CompactHeader(block, salt, short_id_bytes);
    for (size_t i = 0; i < block.txs.size(); ++i) {
        auto it = txs.find(block.txs[i]);
        if (it == txs.end()) throw std::out_of_range("MakeCompactBlock: missing transaction " + block.txs[i].ToHex());
        if (i == 0) {
            cb.prefilled.push_back({0, it->second});
        } else {
            cb.short_ids.push_back(MakeShortId(block.txs[i], salt, short_id_bytes));
        }
    }
    return cb;
}

CompactBlock MakeCompactBlock(const FullBlock& full, uint64_t salt, unsigned short_id_bytes)
{
    if (full.txs.size() != full.block.txs.size()) throw std::out_of_range("MakeCompactBlock: missing transaction bodies");
    CompactBlock cb = CompactHeader(full.block, salt, short_id_bytes);
    if (!full.txs.empty()) cb.prefilled.push_back({0, full.txs[0]});
    cb.short_ids.reserve(full.txs.empty() ? 0 : full.txs.size() - 1);
    for (size_t i = 1; i < full.block.txs.size(); ++i) {
        cb.short_ids.push_back(MakeShortId(full.block.txs[i], salt, short_id_bytes));
    }
    return cb;
}

PartialBlock MatchCompact(const CompactBlock& cb, const Mempool& mempool)
{
    struct Match {
        TxRef tx;
        bool ambiguous{false};
    };
    std::unordered_map<uint64_t, Match> by_short;
    by_short.reserve(mempool.Size());
    mempool.ForEachRef([&](const TxRef& tx) {
        auto [it, inserted] = by_short.try_emplace(MakeShortId(tx->id, cb.salt, cb.short_id_bytes).value, Match{tx});
        if (!inserted) it->second.ambiguous = true;
    });

    PartialBlock partial;
    partial.slots.resize(cb.TxCount());
    std::vector<bool> prefilled(cb.TxCount(), false);
    for (const PrefilledTx& p : cb.prefilled) {
        if (p.index >= partial.slots.size()) throw std::invalid_argument("compact block prefilled index out of range");
        partial.slots[p.index] = p.tx;
        prefilled[p.index] = true;
    }
    size_t next_short = 0;
    for (uint32_t pos = 0; pos < partial.slots.size(); ++pos) {
        if (prefilled[pos]) continue;
        const ShortId& sid = cb.short_ids.at(next_short++);
        auto it = by_short.find(sid.value);
        if (it == by_short.end() || it->second.ambiguous) {
            partial.missing.push_back(pos);
        } else {
            partial.slots[pos] = it->second.tx;
        }
    }
    return partial;
}

namespace {
FullBlock AssembleFromSlots(const CompactBlock& cb, std::vector<TxRef> slots)
{
    FullBlock full;
    full.block.id = cb.block_id;
    full.block.height = cb.height;
    full.block.prev = cb.prev_id;
    full.block.txs.reserve(slots.size());
    for (const TxRef& tx : slots) full.block.txs.push_back(tx->id);
    full.txs = std::move(slots);
    return full;
}
} // namespace

std::variant<FullBlock, NeedTxn> ReconstructCompact(const CompactBlock& cb, const Mempool& mempool)
{
    PartialBlock partial = MatchCompact(cb, mempool);
    if (!partial.missing.empty()) return NeedTxn{std::move(partial.missing)};
    return AssembleFromSlots(cb, std::move(partial.slots));
}

FullBlock CompletePartial(const CompactBlock& cb, PartialBlock partial, const std::vector<TxRef>& txs)
{
    if (txs.size() != partial.missing.size()) throw std::invalid_argument("blocktxn count does not match request");
    for (size_t i = 0; i < txs.size(); ++i) {
        if (!txs[i]) throw std::invalid_argument("blocktxn carries a null transaction");
        partial.slots[partial.missing[i]] = txs[i];
    }
    return AssembleFromSlots(cb, std::move(partial.slots));
}

std::vector<TxRef> ServeBlockTxn(const FullBlock& block, const std::vector<uint32_t>& indexes)
{
    std::vector<TxRef> out;
    out.reserve(indexes.size());
    for (uint32_t i : indexes) {
        if (i >= block.txs.size()) throw std::out_of_range("ServeBlockTxn: index out of range");
        out.push_back(block.txs[i]);
    }
    return out;
}

} // namespace churnsim
