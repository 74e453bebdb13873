// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/relay.h>

#include <algorithm>

namespace churnsim {

namespace {
constexpr size_t SYNC_FLOOR = 1000;
}

size_t FalafelSelectCount(size_t mempool_size)
{
    const size_t tenth = (mempool_size + 9) / 10;
    return std::min(mempool_size, std::max(tenth, SYNC_FLOOR));
}

std::vector<TxId> FalafelSelect(const Mempool& mempool)
{
    return mempool.TopRanked(FalafelSelectCount(mempool.Size()));
}

bool FalafelOnIncoming(SyncTrigger& trigger)
{
    if (++trigger.counter < trigger.limit) return false;
    trigger.counter = 0;
    return trigger.enabled;
}

} // namespace churnsim
