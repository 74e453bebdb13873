// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_TEST_UTIL_H
#define CHURNSIM_TEST_UTIL_H

#include <churnsim/hash.h>
#include <churnsim/random.h>
#include <churnsim/relay.h>
#include <churnsim/txpool.h>

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace churnsim::test {

inline TxId RandomId(Rng& rng)
{
    TxId id;
    for (auto& b : id.bytes) b = static_cast<uint8_t>(rng.Next());
    return id;
}

inline std::vector<TxId> RandomIds(Rng& rng, size_t n)
{
    std::vector<TxId> ids;
    ids.reserve(n);
    for (size_t i = 0; i < n; ++i) ids.push_back(RandomId(rng));
    return ids;
}

/** Id whose first byte is `tag`; handy for readable fixed orderings. */
inline TxId TaggedId(uint8_t tag, uint8_t tail = 0)
{
    TxId id;
    id.bytes[0] = tag;
    id.bytes[31] = tail;
    return id;
}

inline TxRef MakeTx(const TxId& id, int64_t fee, uint32_t size, std::vector<TxId> parents = {})
{
    Transaction tx;
    tx.id = id;
    tx.fee = fee;
    tx.size_bytes = size;
    tx.parents = std::move(parents);
    return MakeTxRef(std::move(tx));
}

inline TxRef RandomTx(Rng& rng)
{
    return MakeTx(RandomId(rng), static_cast<int64_t>(rng.UniformInt(1, 1000)),
                  static_cast<uint32_t>(rng.UniformInt(500, 800)));
}

/** A block of independent transactions in the given order. */
inline FullBlockRef MakeBlockOf(const std::vector<TxRef>& txs, int64_t height = 1, BlockId prev = {})
{
    Block b;
    b.prev = prev;
    b.height = height;
    for (const TxRef& tx : txs) b.txs.push_back(tx->id);
    b.id = ComputeBlockId(b.prev, b.height, b.txs);
    return MakeFullBlock(std::move(b), txs);
}

inline std::vector<TxRef> RandomTxs(Rng& rng, size_t n)
{
    std::vector<TxRef> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(RandomTx(rng));
    return out;
}

inline std::vector<TxId> Sorted(std::vector<TxId> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace churnsim::test

#endif // CHURNSIM_TEST_UTIL_H
