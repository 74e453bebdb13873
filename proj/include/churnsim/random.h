// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_RANDOM_H
#define CHURNSIM_RANDOM_H

#include <cstdint>
#include <random>

namespace churnsim {

/**
 * Seeded generator with distribution helpers whose output depends only on the
 * engine stream, so traces are identical across standard library vendors.
 */
class Rng
{
public:
    explicit Rng(uint64_t seed) : m_engine(seed) {}

    uint64_t Next() { return m_engine(); }
    /** Uniform integer in [lo, hi]. */
    uint64_t UniformInt(uint64_t lo, uint64_t hi);
    /** Uniform double in [0, 1). */
    double Uniform01() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }
    double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
    double Exponential(double mean);
    bool Bernoulli(double p) { return Uniform01() < p; }

private:
    std::mt19937_64 m_engine;
};

/** Derive an independent sub-seed from (seed, stream). */
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

} // namespace churnsim

#endif // CHURNSIM_RANDOM_H
