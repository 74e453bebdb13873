// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_SKETCHES_H
#define CHURNSIM_SKETCHES_H

#include <churnsim/types.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace churnsim {

/** Bit-array Bloom filter with double hashing over two SipHash outputs. */
class BloomFilter
{
public:
    BloomFilter(size_t bit_count, unsigned hash_count, uint64_t seed);

    /**
     * Size for items.size() elements at target_fpr and insert them all.
     * An empty item set yields a 1-bit all-zero filter.
     * Throws std::invalid_argument unless 0 < target_fpr < 1.
     */
    static BloomFilter Build(const std::vector<TxId>& items, double target_fpr, uint64_t seed);

    /** ceil(-n ln p / (ln 2)^2) */
    static size_t OptimalBits(size_t n, double target_fpr);
    /** max(1, round(m/n ln 2)) */
    static unsigned OptimalHashCount(size_t bits, size_t n);

    void Insert(const TxId& id);
    bool Contains(const TxId& id) const;

    size_t BitCount() const { return m_bit_count; }
    unsigned HashCount() const { return m_hash_count; }
    uint64_t Seed() const { return m_seed; }
    /** ceil(m/8) bytes of bits plus 16 bytes of parameters. */
    size_t SerializedSize() const { return (m_bit_count + 7) / 8 + 16; }

private:
    size_t m_bit_count;
    unsigned m_hash_count;
    uint64_t m_seed;
    std::vector<uint64_t> m_words;
};

struct IbltCell {
    int32_t count{0};
    TxId id_sum;
    uint64_t check_sum{0};

    bool IsZero() const { return count == 0 && check_sum == 0 && id_sum.IsNull(); }
    bool operator==(const IbltCell&) const = default;
};

/** Result of a successful peel: ids only in the minuend and ids only in the subtrahend. */
struct IbltDifference {
    std::vector<TxId> a_only;
    std::vector<TxId> b_only;
};

/** Keys-only invertible Bloom lookup table. */
class Iblt
{
public:
    static constexpr unsigned DEFAULT_HASH_COUNT = 3;

    explicit Iblt(size_t cell_count, unsigned hash_count = DEFAULT_HASH_COUNT, uint64_t seed = 0);

    void Insert(const TxId& id) { Update(id, +1); }
    /** Legal without a prior insert; counts go negative. */
    void Erase(const TxId& id) { Update(id, -1); }

    /** Cell-wise difference. Throws std::invalid_argument if parameters differ. */
    Iblt Subtract(const Iblt& other) const;

    /** Peel pure cells until empty. std::nullopt on decode failure. */
    std::optional<IbltDifference> Decode() const;

    /** The k distinct cell indices for id. */
    std::vector<size_t> CellIndices(const TxId& id) const;
    uint64_t Checksum(const TxId& id) const;

    bool IsEmpty() const;
    bool SameParameters(const Iblt& other) const
    {
        return m_cells.size() == other.m_cells.size() && m_hash_count == other.m_hash_count && m_seed == other.m_seed;
    }

    size_t CellCount() const { return m_cells.size(); }
    unsigned HashCount() const { return m_hash_count; }
    uint64_t Seed() const { return m_seed; }
    const std::vector<IbltCell>& Cells() const { return m_cells; }
    /** cell_count * (4 + 32 + 8) bytes plus 16 bytes of parameters. */
    size_t SerializedSize() const { return m_cells.size() * (4 + 32 + 8) + 16; }

    bool operator==(const Iblt&) const = default;

private:
    void Update(const TxId& id, int32_t delta);
    bool IsPure(const IbltCell& cell) const;

    unsigned m_hash_count;
    uint64_t m_seed;
    std::vector<IbltCell> m_cells;
};

} // namespace churnsim

#endif // CHURNSIM_SKETCHES_H
