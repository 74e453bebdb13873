// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/sketches.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace churnsim {

BloomFilter::BloomFilter(size_t bit_count, unsigned hash_count, uint64_t seed)
    : m_bit_count(bit_count), m_hash_count(hash_count), m_seed(seed), m_words((bit_count + 63) / 64)
{
    if (bit_count == 0 || hash_count == 0) throw std::invalid_argument("BloomFilter: bit and hash counts must be positive");
}

size_t BloomFilter::OptimalBits(size_t n, double target_fpr)
{
    if (!(target_fpr > 0.0 && target_fpr < 1.0)) throw std::invalid_argument("BloomFilter: target_fpr must lie in (0, 1)");
    if (n == 0) return 1;
    const double ln2 = std::numbers::ln2;
    return static_cast<size_t>(std::ceil(-static_cast<double>(n) * std::log(target_fpr) / (ln2 * ln2)));
}

unsigned BloomFilter::OptimalHashCount(size_t bits, size_t n)
{
    if (n == 0) return 1;
    const double k = std::round(static_cast<double>(bits) / static_cast<double>(n) * std::numbers::ln2);
    return std::max(1u, static_cast<unsigned>(k));
}

BloomFilter BloomFilter::Build(const std::vector<TxId>& items, double target_fpr, uint64_t seed)
{
    const size_t bits = OptimalBits(items.size(), target_fpr);
    BloomFilter filter(bits, OptimalHashCount(bits, items.size()), seed);
    for (const TxId& id : items) filter.Insert(id);
    return filter;
}

void BloomFilter::Insert(const TxId& id)
{
    const uint64_t h1 = SipHash(m_seed, 0x426c6f6f6d000001ULL, id);
    const uint64_t h2 = SipHash(m_seed, 0x426c6f6f6d000002ULL, id) | 1;
    for (unsigned i = 0; i < m_hash_count; ++i) {
        const uint64_t bit = (h1 + i * h2) % m_bit_count;
        m_words[bit >> 6] |= uint64_t{1} << (bit & 63);
    }
}

bool BloomFilter::Contains(const TxId& id) const
{
    const uint64_t h1 = SipHash(m_seed, 0x426c6f6f6d000001ULL, id);
    const uint64_t h2 = SipHash(m_seed, 0x426c6f6f6d000002ULL, id) | 1;
    for (unsigned i = 0; i < m_hash_count; ++i) {
        const uint64_t bit = (h1 + i * h2) % m_bit_count;
        if (!(m_words[bit >> 6] & (uint64_t{1} << (bit & 63)))) return false;
    }
    return true;
}

} // namespace churnsim
