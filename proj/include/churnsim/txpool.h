// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_TXPOOL_H
#define CHURNSIM_TXPOOL_H

#include <churnsim/types.h>

#include <cstddef>
#include <deque>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace churnsim {

struct Block {
    BlockId id;
    int64_t height{0};
    BlockId prev;
    std::vector<TxId> txs;

    bool operator==(const Block&) const = default;
};

/** Content hash over (prev, height, tx list). Blocks carry no proof-of-work. */
BlockId ComputeBlockId(const BlockId& prev, int64_t height, const std::vector<TxId>& txs);

bool HasDuplicateTxs(const Block& block);

/** Every in-block parent precedes its child. lookup returns nullptr for unknown ids. */
bool IsTopologicallyOrdered(const Block& block, const std::function<const Transaction*(const TxId&)>& lookup);

/**
 * Reorder a set of transactions into the lexicographically smallest topological
 * order by TxId. For a set with no internal dependencies this is ascending TxId.
 */
std::vector<TxId> CanonicalOrder(const std::vector<TxId>& ids, const std::function<const Transaction*(const TxId&)>& lookup);

enum class ScoreMode {
    FEE_RATE, //!< combined fee / combined size over the ancestor set
    FEE_SUM,  //!< combined fee over the ancestor set
};

/** Exact rational ancestor score. Compare with BetterScore(). */
struct AncestorScore {
    int64_t fee{0};
    int64_t size{0};

    double Value(ScoreMode mode) const { return mode == ScoreMode::FEE_SUM ? double(fee) : double(fee) / double(size); }
};

/** True iff a ranks strictly above b. */
bool BetterScore(const AncestorScore& a, const AncestorScore& b, ScoreMode mode);

enum class InsertOutcome { ACCEPTED, DUPLICATE, ORPHANED };

struct InsertResult {
    InsertOutcome outcome;
    /** Every transaction that entered the pool, in order: the inserted one and any promoted orphans. */
    std::vector<TxId> accepted;
};

class Mempool
{
public:
    struct Options {
        ScoreMode score_mode{ScoreMode::FEE_RATE};
        size_t max_orphans{1000};
        /** Number of confirmed ids remembered; 0 keeps them all. */
        size_t confirmed_retention{0};
    };

    Mempool() : Mempool(Options{}) {}
    explicit Mempool(Options options);

    InsertResult Insert(TxRef tx);
    InsertResult Insert(Transaction tx) { return Insert(MakeTxRef(std::move(tx))); }

    /** Move every block transaction to the confirmed set. Returns the number of entries removed. */
    size_t RemoveConfirmed(const Block& block, std::vector<TxId>* promoted = nullptr);

    /** Record ids confirmed outside this pool's view (history before a run starts). */
    void MarkConfirmed(const TxId& id);

    /** Transitive closure of unconfirmed parents, including id. Throws std::out_of_range for unknown ids. */
    std::set<TxId> AncestorSet(const TxId& id) const;
    AncestorScore Score(const TxId& id) const;

    /** First min(k, Size()) ids in (score desc, TxId asc) order. */
    std::vector<TxId> TopRanked(size_t k) const;

    /**
     * Greedy selection by ancestor score, pulling unconfirmed ancestors along,
     * returned in canonical topological order. Transactions failing `eligible`
     * are skipped together with their descendants.
     */
    Block AssembleBlock(size_t max_txs, const BlockId& prev, int64_t height,
                        const std::function<bool(const Transaction&)>& eligible = {}) const;

    bool Contains(const TxId& id) const { return m_entries.count(id) > 0; }
    bool IsOrphan(const TxId& id) const { return m_orphans.count(id) > 0; }
    bool IsConfirmed(const TxId& id) const { return m_confirmed.count(id) > 0; }
    /** In the pool, the orphan buffer, or the confirmed set. */
    bool Knows(const TxId& id) const { return Contains(id) || IsOrphan(id) || IsConfirmed(id); }

    /** nullptr when not in the pool (orphans are included). */
    const Transaction* Find(const TxId& id) const;
    TxRef Get(const TxId& id) const;

    size_t Size() const { return m_entries.size(); }
    size_t OrphanCount() const { return m_orphans.size(); }
    size_t ConfirmedCount() const { return m_confirmed.size(); }
    ScoreMode GetScoreMode() const { return m_options.score_mode; }

    /** Parents of orphan `id` not yet known. Empty if id is not an orphan. */
    std::vector<TxId> MissingParents(const TxId& id) const;

    template <typename F>
    void ForEach(F&& f) const
    {
        for (const auto& [id, entry] : m_entries) f(*entry.tx);
    }

    template <typename F>
    void ForEachRef(F&& f) const
    {
        for (const auto& [id, entry] : m_entries) f(entry.tx);
    }

    /** Ids in rank order; used by consistency checks. */
    std::vector<TxId> RankedIds() const { return TopRanked(m_entries.size()); }

private:
    struct Entry {
        TxRef tx;
        std::vector<TxId> children;
        AncestorScore score;
    };
    struct RankKey {
        AncestorScore score;
        TxId id;
    };
    struct RankCompare {
        ScoreMode mode;
        bool operator()(const RankKey& a, const RankKey& b) const;
    };
    struct Orphan {
        TxRef tx;
        uint64_t seq;
    };

    bool ParentsKnown(const Transaction& tx) const;
    AncestorScore ComputeScore(const TxId& id) const;
    void AddEntry(const TxRef& tx);
    void Rescore(const TxId& id);
    void RescoreDescendants(const std::vector<TxId>& roots);
    void AddOrphan(const TxRef& tx);
    void EraseOrphan(const TxId& id);
    /** Promote orphans waiting on the given ids; appends newly accepted ids. */
    void PromoteOrphans(std::vector<TxId> ready_parents, std::vector<TxId>& accepted);
    void RememberConfirmed(const TxId& id);

    Options m_options;
    std::unordered_map<TxId, Entry> m_entries;
    std::set<RankKey, RankCompare> m_rank;

    std::unordered_map<TxId, Orphan> m_orphans;
    std::deque<std::pair<uint64_t, TxId>> m_orphan_age;
    std::unordered_map<TxId, std::vector<TxId>> m_orphans_by_parent;
    uint64_t m_orphan_seq{0};

    std::unordered_set<TxId> m_confirmed;
    std::deque<TxId> m_confirmed_fifo;
};

} // namespace churnsim

#endif // CHURNSIM_TXPOOL_H
