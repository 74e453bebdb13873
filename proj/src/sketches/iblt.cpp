// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/hash.h>
#include <churnsim/sketches.h>

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace churnsim {

namespace {
constexpr uint64_t CHECKSUM_KEY = 0x636865636b73756dULL;
}

Iblt::Iblt(size_t cell_count, unsigned hash_count, uint64_t seed)
    : m_hash_count(hash_count), m_seed(seed), m_cells(cell_count)
{
    if (hash_count == 0 || cell_count < hash_count) {
        throw std::invalid_argument("Iblt: need at least hash_count cells and a positive hash count");
    }
}

std::vector<size_t> Iblt::CellIndices(const TxId& id) const
{
    // Distinct cells per id: an id listed twice in one cell would cancel its
    // own id_sum there and let an opposite-sign neighbour pass as pure.
    std::vector<size_t> out;
    out.reserve(m_hash_count);
    for (uint64_t key = 0; out.size() < m_hash_count; ++key) {
        const size_t idx = SipHash(m_seed, key, id) % m_cells.size();
        if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
    }
    return out;
}

uint64_t Iblt::Checksum(const TxId& id) const
{
    return SipHash(m_seed ^ CHECKSUM_KEY, CHECKSUM_KEY, id);
}

void Iblt::Update(const TxId& id, int32_t delta)
{
    const uint64_t check = Checksum(id);
    for (size_t idx : CellIndices(id)) {
        IbltCell& cell = m_cells[idx];
        cell.count += delta;
        for (size_t b = 0; b < 32; ++b) cell.id_sum.bytes[b] ^= id.bytes[b];
        cell.check_sum ^= check;
    }
}

Iblt Iblt::Subtract(const Iblt& other) const
{
    if (!SameParameters(other)) throw std::invalid_argument("Iblt: cannot subtract tables with different parameters");
    Iblt out = *this;
    for (size_t i = 0; i < m_cells.size(); ++i) {
        IbltCell& c = out.m_cells[i];
        const IbltCell& o = other.m_cells[i];
        c.count -= o.count;
        for (size_t b = 0; b < 32; ++b) c.id_sum.bytes[b] ^= o.id_sum.bytes[b];
        c.check_sum ^= o.check_sum;
    }
    return out;
}

bool Iblt::IsPure(const IbltCell& cell) const
{
    return (cell.count == 1 || cell.count == -1) && cell.check_sum == Checksum(cell.id_sum);
}

bool Iblt::IsEmpty() const
{
    for (const IbltCell& c : m_cells) {
        if (!c.IsZero()) return false;
    }
    return true;
}

std::optional<IbltDifference> Iblt::Decode() const
{
    Iblt work = *this;
    IbltDifference diff;
    std::vector<size_t> candidates;
    for (size_t i = 0; i < work.m_cells.size(); ++i) {
        if (work.IsPure(work.m_cells[i])) candidates.push_back(i);
    }

    // A checksum collision could make a bogus cell look pure; cap the number
    // of peels. Counts of opposite sign cancel, so |count| alone is too tight.
    size_t budget = m_cells.size() * m_hash_count;
    for (const IbltCell& c : m_cells) budget += static_cast<size_t>(std::abs(c.count));

    while (!candidates.empty()) {
        const size_t i = candidates.back();
        candidates.pop_back();
        const IbltCell cell = work.m_cells[i];
        if (!work.IsPure(cell)) continue;
        if (budget-- == 0) return std::nullopt;

        const TxId id = cell.id_sum;
        if (cell.count == 1) {
            diff.a_only.push_back(id);
            work.Update(id, -1);
        } else {
            diff.b_only.push_back(id);
            work.Update(id, +1);
        }
        for (size_t j : work.CellIndices(id)) {
            if (work.IsPure(work.m_cells[j])) candidates.push_back(j);
        }
    }
    if (!work.IsEmpty()) return std::nullopt;
    return diff;
}

} // namespace churnsim
