// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_TYPES_H
#define CHURNSIM_TYPES_H

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace churnsim {

/** Simulation time in milliseconds. */
using SimTime = int64_t;
using NodeId = uint32_t;

/** 32-byte opaque identifier. Ordered lexicographically by byte. */
template <typename Tag>
struct Hash256 {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Hash256&) const = default;
    bool operator==(const Hash256&) const = default;

    bool IsNull() const
    {
        for (uint8_t b : bytes) {
            if (b != 0) return false;
        }
        return true;
    }

    /** Little-endian read of the first eight bytes; ids are hash outputs so this is well mixed. */
    uint64_t Low64() const
    {
        uint64_t v;
        std::memcpy(&v, bytes.data(), sizeof(v));
        return v;
    }

    std::string ToHex() const;
    static Hash256 FromHex(std::string_view hex);
};

struct TxIdTag;
struct BlockIdTag;
using TxId = Hash256<TxIdTag>;
using BlockId = Hash256<BlockIdTag>;

struct Transaction {
    TxId id;
    uint32_t size_bytes{0};
    int64_t fee{0};
    /** Unconfirmed dependencies at creation time. */
    std::vector<TxId> parents;
    SimTime created_at{0};
};

using TxRef = std::shared_ptr<const Transaction>;

inline TxRef MakeTxRef(Transaction tx) { return std::make_shared<const Transaction>(std::move(tx)); }

} // namespace churnsim

template <typename Tag>
struct std::hash<churnsim::Hash256<Tag>> {
    size_t operator()(const churnsim::Hash256<Tag>& h) const noexcept { return static_cast<size_t>(h.Low64()); }
};

#endif // CHURNSIM_TYPES_H
