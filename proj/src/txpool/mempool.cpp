// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/txpool.h>

#include <algorithm>
#include <stdexcept>

namespace churnsim {

bool BetterScore(const AncestorScore& a, const AncestorScore& b, ScoreMode mode)
{
    if (mode == ScoreMode::FEE_SUM) return a.fee > b.fee;
    // a.fee / a.size > b.fee / b.size, cross-multiplied to stay exact
    return static_cast<__int128>(a.fee) * b.size > static_cast<__int128>(b.fee) * a.size;
}

bool Mempool::RankCompare::operator()(const RankKey& a, const RankKey& b) const
{
    if (BetterScore(a.score, b.score, mode)) return true;
    if (BetterScore(b.score, a.score, mode)) return false;
    return a.id < b.id;
}

Mempool::Mempool(Options options) : m_options(options), m_rank(RankCompare{options.score_mode}) {}

bool Mempool::ParentsKnown(const Transaction& tx) const
{
    for (const TxId& parent : tx.parents) {
        if (!m_entries.count(parent) && !m_confirmed.count(parent)) return false;
    }
    return true;
}

AncestorScore Mempool::ComputeScore(const TxId& id) const
{
    AncestorScore score;
    std::vector<TxId> stack{id};
    std::unordered_set<TxId> seen{id};
    while (!stack.empty()) {
        TxId cur = stack.back();
        stack.pop_back();
        const Entry& e = m_entries.at(cur);
        score.fee += e.tx->fee;
        score.size += e.tx->size_bytes;
        for (const TxId& parent : e.tx->parents) {
            if (m_entries.count(parent) && seen.insert(parent).second) stack.push_back(parent);
        }
    }
    return score;
}

std::set<TxId> Mempool::AncestorSet(const TxId& id) const
{
    if (!m_entries.count(id)) throw std::out_of_range("AncestorSet: unknown transaction " + id.ToHex());
    std::set<TxId> out{id};
    std::vector<TxId> stack{id};
    while (!stack.empty()) {
        TxId cur = stack.back();
        stack.pop_back();
        for (const TxId& parent : m_entries.at(cur).tx->parents) {
            if (m_entries.count(parent) && out.insert(parent).second) stack.push_back(parent);
        }
    }
    return out;
}

AncestorScore Mempool::Score(const TxId& id) const
{
    auto it = m_entries.find(id);
    if (it == m_entries.end()) throw std::out_of_range("Score: unknown transaction " + id.ToHex());
    return it->second.score;
}

void Mempool::AddEntry(const TxRef& tx)
{
    Entry& e = m_entries[tx->id];
    e.tx = tx;
    for (const TxId& parent : tx->parents) {
        auto it = m_entries.find(parent);
        if (it != m_entries.end() && parent != tx->id) it->second.children.push_back(tx->id);
    }
    e.score = ComputeScore(tx->id);
    m_rank.insert(RankKey{e.score, tx->id});
}

void Mempool::Rescore(const TxId& id)
{
    Entry& e = m_entries.at(id);
    m_rank.erase(RankKey{e.score, id});
    e.score = ComputeScore(id);
    m_rank.insert(RankKey{e.score, id});
}

void Mempool::RescoreDescendants(const std::vector<TxId>& roots)
{
    std::unordered_set<TxId> seen;
    std::vector<TxId> stack;
    for (const TxId& r : roots) {
        if (m_entries.count(r) && seen.insert(r).second) stack.push_back(r);
    }
    while (!stack.empty()) {
        TxId cur = stack.back();
        stack.pop_back();
        Rescore(cur);
        for (const TxId& child : m_entries.at(cur).children) {
            if (m_entries.count(child) && seen.insert(child).second) stack.push_back(child);
        }
    }
}

void Mempool::AddOrphan(const TxRef& tx)
{
    const uint64_t seq = m_orphan_seq++;
    m_orphans.emplace(tx->id, Orphan{tx, seq});
    m_orphan_age.emplace_back(seq, tx->id);
    for (const TxId& parent : tx->parents) m_orphans_by_parent[parent].push_back(tx->id);

    while (m_orphans.size() > m_options.max_orphans && !m_orphan_age.empty()) {
        auto [old_seq, old_id] = m_orphan_age.front();
        m_orphan_age.pop_front();
        auto it = m_orphans.find(old_id);
        if (it != m_orphans.end() && it->second.seq == old_seq) EraseOrphan(old_id);
    }
}

void Mempool::EraseOrphan(const TxId& id)
{
    auto it = m_orphans.find(id);
    if (it == m_orphans.end()) return;
    for (const TxId& parent : it->second.tx->parents) {
        auto w = m_orphans_by_parent.find(parent);
        if (w == m_orphans_by_parent.end()) continue;
        auto& v = w->second;
        v.erase(std::remove(v.begin(), v.end(), id), v.end());
        if (v.empty()) m_orphans_by_parent.erase(w);
    }
    // Stale age records are skipped lazily by sequence number.
    m_orphans.erase(it);
}

void Mempool::PromoteOrphans(std::vector<TxId> ready_parents, std::vector<TxId>& accepted)
{
    while (!ready_parents.empty()) {
        TxId parent = ready_parents.back();
        ready_parents.pop_back();
        auto w = m_orphans_by_parent.find(parent);
        if (w == m_orphans_by_parent.end()) continue;
        std::vector<TxId> waiting = w->second;
        for (const TxId& child : waiting) {
            auto it = m_orphans.find(child);
            if (it == m_orphans.end() || !ParentsKnown(*it->second.tx)) continue;
            TxRef tx = it->second.tx;
            EraseOrphan(child);
            AddEntry(tx);
            accepted.push_back(child);
            ready_parents.push_back(child);
        }
    }
}

InsertResult Mempool::Insert(TxRef tx)
{
    if (!tx || tx->size_bytes == 0) throw std::invalid_argument("Insert: transaction must have positive size");
    if (Knows(tx->id)) return {InsertOutcome::DUPLICATE, {}};
    if (!ParentsKnown(*tx)) {
        AddOrphan(tx);
        return {InsertOutcome::ORPHANED, {}};
    }
    InsertResult res{InsertOutcome::ACCEPTED, {tx->id}};
    AddEntry(tx);
    PromoteOrphans({tx->id}, res.accepted);
    return res;
}

void Mempool::RememberConfirmed(const TxId& id)
{
    if (!m_confirmed.insert(id).second) return;
    if (m_options.confirmed_retention == 0) return;
    m_confirmed_fifo.push_back(id);
    while (m_confirmed_fifo.size() > m_options.confirmed_retention) {
        m_confirmed.erase(m_confirmed_fifo.front());
        m_confirmed_fifo.pop_front();
    }
}

void Mempool::MarkConfirmed(const TxId& id)
{
    if (m_entries.count(id)) {
        Block b;
        b.txs.push_back(id);
        RemoveConfirmed(b);
        return;
    }
    EraseOrphan(id);
    RememberConfirmed(id);
}

size_t Mempool::RemoveConfirmed(const Block& block, std::vector<TxId>* promoted)
{
    size_t removed = 0;
    std::vector<TxId> orphaned_children;
    for (const TxId& id : block.txs) {
        auto it = m_entries.find(id);
        if (it != m_entries.end()) {
            Entry& e = it->second;
            m_rank.erase(RankKey{e.score, id});
            for (const TxId& parent : e.tx->parents) {
                auto p = m_entries.find(parent);
                if (p == m_entries.end()) continue;
                auto& ch = p->second.children;
                ch.erase(std::remove(ch.begin(), ch.end(), id), ch.end());
            }
            orphaned_children.insert(orphaned_children.end(), e.children.begin(), e.children.end());
            m_entries.erase(it);
            ++removed;
        } else {
            EraseOrphan(id);
        }
        RememberConfirmed(id);
    }
    RescoreDescendants(orphaned_children);

    std::vector<TxId> accepted;
    PromoteOrphans(block.txs, accepted);
    if (promoted) promoted->insert(promoted->end(), accepted.begin(), accepted.end());
    return removed;
}

const Transaction* Mempool::Find(const TxId& id) const
{
    auto it = m_entries.find(id);
    if (it != m_entries.end()) return it->second.tx.get();
    auto o = m_orphans.find(id);
    if (o != m_orphans.end()) return o->second.tx.get();
    return nullptr;
}

TxRef Mempool::Get(const TxId& id) const
{
    auto it = m_entries.find(id);
    if (it != m_entries.end()) return it->second.tx;
    auto o = m_orphans.find(id);
    if (o != m_orphans.end()) return o->second.tx;
    return nullptr;
}

std::vector<TxId> Mempool::MissingParents(const TxId& id) const
{
    std::vector<TxId> out;
    auto it = m_orphans.find(id);
    if (it == m_orphans.end()) return out;
    for (const TxId& parent : it->second.tx->parents) {
        if (!m_entries.count(parent) && !m_confirmed.count(parent)) out.push_back(parent);
    }
    return out;
}

std::vector<TxId> Mempool::TopRanked(size_t k) const
{
    std::vector<TxId> out;
    out.reserve(std::min(k, m_rank.size()));
    for (const RankKey& key : m_rank) {
        if (out.size() >= k) break;
        out.push_back(key.id);
    }
    return out;
}

Block Mempool::AssembleBlock(size_t max_txs, const BlockId& prev, int64_t height,
                             const std::function<bool(const Transaction&)>& eligible) const
{
    if (max_txs == 0) throw std::invalid_argument("AssembleBlock: max_txs must be positive");
    std::unordered_set<TxId> selected;
    std::vector<TxId> chosen;
    for (const RankKey& key : m_rank) {
        if (chosen.size() >= max_txs) break;
        if (selected.count(key.id)) continue;

        std::vector<TxId> package;
        std::unordered_set<TxId> in_package{key.id};
        std::vector<TxId> stack{key.id};
        bool ok = true;
        while (!stack.empty() && ok) {
            TxId cur = stack.back();
            stack.pop_back();
            const Transaction& tx = *m_entries.at(cur).tx;
            if (eligible && !eligible(tx)) ok = false;
            package.push_back(cur);
            for (const TxId& parent : tx.parents) {
                if (m_entries.count(parent) && !selected.count(parent) && in_package.insert(parent).second) {
                    stack.push_back(parent);
                }
            }
        }
        if (!ok || chosen.size() + package.size() > max_txs) continue;
        for (const TxId& id : package) {
            selected.insert(id);
            chosen.push_back(id);
        }
    }

    Block block;
    block.prev = prev;
    block.height = height;
    block.txs = CanonicalOrder(chosen, [this](const TxId& id) { return Find(id); });
    block.id = ComputeBlockId(prev, height, block.txs);
    return block;
}

} // namespace churnsim
