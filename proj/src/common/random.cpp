// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/random.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace churnsim {

uint64_t Rng::UniformInt(uint64_t lo, uint64_t hi)
{
    if (lo > hi) throw std::invalid_argument("UniformInt: empty range");
    const uint64_t span = hi - lo;
    if (span == std::numeric_limits<uint64_t>::max()) return m_engine();
    const uint64_t range = span + 1;
    // Rejection sampling keeps the draw unbiased.
    const uint64_t limit = std::numeric_limits<uint64_t>::max() - (std::numeric_limits<uint64_t>::max() % range);
    uint64_t x;
    do {
        x = m_engine();
    } while (x >= limit);
    return lo + x % range;
}

double Rng::Exponential(double mean)
{
    // 1 - u lies in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - Uniform01());
}

uint64_t DeriveSeed(uint64_t seed, uint64_t stream)
{
    // splitmix64 finaliser over the combined input
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace churnsim
