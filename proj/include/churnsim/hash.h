// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_HASH_H
#define CHURNSIM_HASH_H

#include <churnsim/types.h>

#include <array>
#include <cstdint>
#include <span>

namespace churnsim {

/** SipHash-2-4 keyed by (k0, k1). */
uint64_t SipHash(uint64_t k0, uint64_t k1, std::span<const uint8_t> data);

template <typename Tag>
uint64_t SipHash(uint64_t k0, uint64_t k1, const Hash256<Tag>& h)
{
    return SipHash(k0, k1, std::span<const uint8_t>(h.bytes));
}

/** BLAKE2b with a 32-byte digest. */
std::array<uint8_t, 32> Blake2b256(std::span<const uint8_t> data);

/** Incremental BLAKE2b-256 writer. */
class HashWriter
{
public:
    HashWriter();
    ~HashWriter();
    HashWriter(const HashWriter&) = delete;
    HashWriter& operator=(const HashWriter&) = delete;

    HashWriter& Write(std::span<const uint8_t> data);
    HashWriter& WriteU64(uint64_t v);
    template <typename Tag>
    HashWriter& Write(const Hash256<Tag>& h) { return Write(std::span<const uint8_t>(h.bytes)); }

    std::array<uint8_t, 32> Finalize();

private:
    struct State;
    std::unique_ptr<State> m_state;
};

/** Deterministic transaction id for the counter-th transaction of a run. */
TxId MakeTxId(uint64_t seed, uint64_t counter);

} // namespace churnsim

#endif // CHURNSIM_HASH_H
