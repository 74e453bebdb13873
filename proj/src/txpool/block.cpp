// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/txpool.h>

#include <functional>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace churnsim {

BlockId ComputeBlockId(const BlockId& prev, int64_t height, const std::vector<TxId>& txs)
{
    HashWriter w;
    w.Write(prev).WriteU64(static_cast<uint64_t>(height)).WriteU64(txs.size());
    for (const TxId& id : txs) w.Write(id);
    BlockId out;
    out.bytes = w.Finalize();
    return out;
}

bool HasDuplicateTxs(const Block& block)
{
    std::unordered_set<TxId> seen;
    seen.reserve(block.txs.size());
    for (const TxId& id : block.txs) {
        if (!seen.insert(id).second) return true;
    }
    return false;
}

bool IsTopologicallyOrdered(const Block& block, const std::function<const Transaction*(const TxId&)>& lookup)
{
    std::unordered_map<TxId, size_t> pos;
    pos.reserve(block.txs.size());
    for (size_t i = 0; i < block.txs.size(); ++i) pos.emplace(block.txs[i], i);
    for (size_t i = 0; i < block.txs.size(); ++i) {
        const Transaction* tx = lookup(block.txs[i]);
        if (!tx) continue;
        for (const TxId& parent : tx->parents) {
            auto it = pos.find(parent);
            if (it != pos.end() && it->second >= i) return false;
        }
    }
    return true;
}

std::vector<TxId> CanonicalOrder(const std::vector<TxId>& ids, const std::function<const Transaction*(const TxId&)>& lookup)
{
    std::unordered_map<TxId, size_t> pending_parents;
    std::unordered_map<TxId, std::vector<TxId>> children;
    pending_parents.reserve(ids.size());
    for (const TxId& id : ids) pending_parents.emplace(id, 0);
    for (const TxId& id : ids) {
        const Transaction* tx = lookup(id);
        if (!tx) continue;
        for (const TxId& parent : tx->parents) {
            if (parent == id || !pending_parents.count(parent)) continue;
            ++pending_parents[id];
            children[parent].push_back(id);
        }
    }

    std::priority_queue<TxId, std::vector<TxId>, std::greater<TxId>> ready;
    for (const auto& [id, n] : pending_parents) {
        if (n == 0) ready.push(id);
    }
    std::vector<TxId> out;
    out.reserve(ids.size());
    while (!ready.empty()) {
        TxId id = ready.top();
        ready.pop();
        out.push_back(id);
        auto it = children.find(id);
        if (it == children.end()) continue;
        for (const TxId& child : it->second) {
            if (--pending_parents[child] == 0) ready.push(child);
        }
    }
    return out;
}

} // namespace churnsim
