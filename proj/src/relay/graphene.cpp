// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/relay.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace churnsim {

namespace {
constexpr uint64_t SKETCH_SEED_TWEAK = 0x736b65746368ULL;
}

size_t GrapheneCellCount(size_t receiver_mempool_size, const GrapheneParams& params)
{
    const size_t expected_fp = std::max<size_t>(1, static_cast<size_t>(std::ceil(params.fpr * static_cast<double>(receiver_mempool_size))));
    const double estimate = static_cast<double>(expected_fp + params.slack);
    return std::max(params.min_cells, static_cast<size_t>(std::ceil(params.cell_multiplier * estimate)));
}

GrapheneBlock MakeGraphene(const Block& block, size_t receiver_mempool_size, const GrapheneParams& params,
                           uint64_t seed, size_t cell_count_override)
{
    if (block.txs.empty()) throw std::invalid_argument("MakeGraphene: empty block");
    const size_t cells = cell_count_override ? cell_count_override : GrapheneCellCount(receiver_mempool_size, params);
    GrapheneBlock gb{
        .block_id = block.id,
        .height = block.height,
        .prev_id = block.prev,
        .tx_count = static_cast<uint32_t>(block.txs.size()),
        .filter = BloomFilter::Build(block.txs, params.fpr, seed),
        .sketch = Iblt(cells, params.hash_count, seed ^ SKETCH_SEED_TWEAK),
        .reference = std::make_shared<const Block>(block),
    };
    for (const TxId& id : block.txs) gb.sketch.Insert(id);
    return gb;
}

namespace {
FullBlock OrderedBlock(const GrapheneBlock& gb, const std::unordered_map<TxId, TxRef>& bodies)
{
    std::vector<TxId> ids;
    ids.reserve(bodies.size());
    for (const auto& [id, tx] : bodies) ids.push_back(id);
    FullBlock full;
    full.block.height = gb.height;
    full.block.prev = gb.prev_id;
    full.block.txs = CanonicalOrder(ids, [&](const TxId& id) -> const Transaction* {
        auto it = bodies.find(id);
        return it == bodies.end() ? nullptr : it->second.get();
    });
    full.block.id = gb.block_id;
    full.txs.reserve(full.block.txs.size());
    for (const TxId& id : full.block.txs) full.txs.push_back(bodies.at(id));
    return full;
}
} // namespace

GrapheneResult ReconstructGraphene(const GrapheneBlock& gb, const Mempool& mempool)
{
    std::vector<TxId> candidates;
    mempool.ForEach([&](const Transaction& tx) {
        if (gb.filter.Contains(tx.id)) candidates.push_back(tx.id);
    });
    Iblt local(gb.sketch.CellCount(), gb.sketch.HashCount(), gb.sketch.Seed());
    for (const TxId& id : candidates) local.Insert(id);

    std::optional<IbltDifference> diff = local.Subtract(gb.sketch).Decode();
    if (!diff) return GrapheneDecodeFail{};

    std::unordered_set<TxId> members(candidates.begin(), candidates.end());
    for (const TxId& id : diff->a_only) members.erase(id);
    for (const TxId& id : diff->b_only) members.insert(id);
    if (members.size() != gb.tx_count) return GrapheneDecodeFail{};

    GrapheneNeedTx need;
    std::unordered_map<TxId, TxRef> bodies;
    for (const TxId& id : members) {
        TxRef tx = mempool.Get(id);
        if (tx) {
            bodies.emplace(id, std::move(tx));
        } else {
            need.missing.push_back(id);
        }
    }
    if (!need.missing.empty()) {
        std::sort(need.missing.begin(), need.missing.end());
        need.block_ids.assign(members.begin(), members.end());
        std::sort(need.block_ids.begin(), need.block_ids.end());
        return need;
    }
    return GrapheneReconstructed{OrderedBlock(gb, bodies)};
}

FullBlock AssembleGrapheneBlock(const GrapheneBlock& gb, const std::vector<TxRef>& txs)
{
    std::unordered_map<TxId, TxRef> bodies;
    for (const TxRef& tx : txs) bodies.emplace(tx->id, tx);
    return OrderedBlock(gb, bodies);
}

bool GrapheneThresholdOutcome(const Block& block, const Mempool& mempool, double threshold)
{
    if (block.txs.empty()) throw std::invalid_argument("GrapheneThresholdOutcome: empty block");
    size_t missing = 0;
    for (const TxId& id : block.txs) {
        if (!mempool.Find(id)) ++missing;
    }
    return !(static_cast<double>(missing) / static_cast<double>(block.txs.size()) > threshold);
}

} // namespace churnsim
