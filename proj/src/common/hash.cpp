// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>

#include <sodium.h>

#include <stdexcept>

namespace churnsim {

namespace {
void EnsureSodium()
{
    static const bool ready = [] { return sodium_init() >= 0; }();
    if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

void PutU64(uint8_t* out, uint64_t v)
{
    for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(v >> (8 * i));
}
} // namespace

uint64_t SipHash(uint64_t k0, uint64_t k1, std::span<const uint8_t> data)
{
    unsigned char key[crypto_shorthash_siphash24_KEYBYTES];
    PutU64(key, k0);
    PutU64(key + 8, k1);
    unsigned char out[crypto_shorthash_siphash24_BYTES];
    crypto_shorthash_siphash24(out, data.data(), data.size(), key);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | out[i];
    return v;
}

std::array<uint8_t, 32> Blake2b256(std::span<const uint8_t> data)
{
    EnsureSodium();
    std::array<uint8_t, 32> out;
    crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
    return out;
}

struct HashWriter::State {
    crypto_generichash_state st;
};

HashWriter::HashWriter() : m_state(std::make_unique<State>())
{
    EnsureSodium();
    crypto_generichash_init(&m_state->st, nullptr, 0, 32);
}

HashWriter::~HashWriter() = default;

HashWriter& HashWriter::Write(std::span<const uint8_t> data)
{
    crypto_generichash_update(&m_state->st, data.data(), data.size());
    return *this;
}

HashWriter& HashWriter::WriteU64(uint64_t v)
{
    uint8_t buf[8];
    PutU64(buf, v);
    return Write(std::span<const uint8_t>(buf, 8));
}

std::array<uint8_t, 32> HashWriter::Finalize()
{
    std::array<uint8_t, 32> out;
    crypto_generichash_final(&m_state->st, out.data(), out.size());
    return out;
}

TxId MakeTxId(uint64_t seed, uint64_t counter)
{
    uint8_t buf[17];
    buf[0] = 't';
    PutU64(buf + 1, seed);
    PutU64(buf + 9, counter);
    TxId id;
    id.bytes = Blake2b256(std::span<const uint8_t>(buf, sizeof(buf)));
    return id;
}

} // namespace churnsim
