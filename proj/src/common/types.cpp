// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/types.h>

#include <stdexcept>

namespace churnsim {

namespace {
constexpr char HEX[] = "0123456789abcdef";

int HexValue(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace

template <typename Tag>
std::string Hash256<Tag>::ToHex() const
{
    std::string out;
    out.reserve(64);
    for (uint8_t b : bytes) {
        out.push_back(HEX[b >> 4]);
        out.push_back(HEX[b & 0xf]);
    }
    return out;
}

template <typename Tag>
Hash256<Tag> Hash256<Tag>::FromHex(std::string_view hex)
{
    if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 characters");
    Hash256 h;
    for (size_t i = 0; i < 32; ++i) {
        int hi = HexValue(hex[2 * i]);
        int lo = HexValue(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
        h.bytes[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return h;
}

template struct Hash256<TxIdTag>;
template struct Hash256<BlockIdTag>;

} // namespace churnsim
