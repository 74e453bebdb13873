// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef CHURNSIM_METRICS_H
#define CHURNSIM_METRICS_H

#include <churnsim/node.h>
#include <churnsim/types.h>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace churnsim {

//
// Event log
//

struct LogEntry {
    SimTime time{0};
    NodeId node{0};
    std::string kind;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::optional<std::string> detail;

    bool operator==(const LogEntry&) const = default;
};

/** `time=<ms> node=<id> kind=<tag> k=v ... [detail=<id>]`; values are percent-escaped. */
std::string FormatLogLine(const LogEntry& entry);
/** Throws std::invalid_argument on a malformed line. */
LogEntry ParseLogLine(const std::string& line);

std::string EscapeLogValue(const std::string& value);
std::string UnescapeLogValue(const std::string& value);

/** A detail record: the identifier of its parent entry and a list of values. */
struct DetailRecord {
    std::string id;
    std::string kind;
    std::vector<std::string> values;

    bool operator==(const DetailRecord&) const = default;
};

std::string FormatDetailLine(const DetailRecord& record);
DetailRecord ParseDetailLine(const std::string& line);

/**
 * Append-only log sink. Either stream may be null to discard that side.
 * Every write is flushed; a failed write throws std::runtime_error.
 */
class EventLog
{
public:
    EventLog(std::ostream* main, std::ostream* detail);

    void Record(const LogEntry& entry);
    void RecordDetail(const DetailRecord& record);

    uint64_t EntryCount() const { return m_entries; }

private:
    std::ostream* m_main;
    std::ostream* m_detail;
    uint64_t m_entries{0};
};

//
// Outcomes
//

struct BlockOutcome {
    NodeId node{0};
    /** Per-node observation index, from 0. */
    uint64_t block_time{0};
    BlockId block_id;
    RelayMode protocol{RelayMode::COMPACT};
    bool success{false};
    uint32_t missing{0};
    uint32_t round_trips{0};
    uint64_t bytes_down{0};
    uint64_t bytes_up{0};

    bool operator==(const BlockOutcome&) const = default;
};

/**
 * Rate at index i over outcomes [i - window + 1, i] (trailing) or
 * [i - window/2, i + (window-1)/2] (centered), clipped to the available range.
 */
std::vector<double> MovingSuccessRate(const std::vector<bool>& success, size_t window = 36, bool centered = false);
std::vector<double> MovingSuccessRate(const std::vector<BlockOutcome>& outcomes, size_t window = 36,
                                      bool centered = false);

class InsufficientData : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct NodeSummary {
    NodeId node{0};
    uint64_t blocks{0};
    uint64_t successes{0};
    /** Fraction in [0, 1]. */
    double avg_rate{0};
};

struct RunSummary {
    NodeSummary a;
    NodeSummary b;
    /** |rate_a - rate_b| in percentage points. */
    double gap_pp{0};
};

/** Over the first `first_n` blocks each node observed. Throws InsufficientData if either saw none. */
RunSummary Summarize(const std::vector<BlockOutcome>& a, const std::vector<BlockOutcome>& b, size_t first_n = 750);

//
// Bandwidth
//

enum class Direction { UP, DOWN };

/** Message kinds for accounting: the variant kinds plus sync inventories split from ordinary ones. */
constexpr size_t BANDWIDTH_KIND_COUNT = MESSAGE_KIND_COUNT + 1;
constexpr size_t INV_SYNC_KIND = MESSAGE_KIND_COUNT;

size_t BandwidthKind(const Message& msg);
std::string_view BandwidthKindName(size_t kind);

struct ByteCount {
    uint64_t bytes{0};
    uint64_t count{0};
    bool operator==(const ByteCount&) const = default;
};

struct TraceMessage {
    NodeId from;
    NodeId to;
    MessageRef msg;
};

/** Streaming per-node, per-kind, per-direction byte totals. */
class BandwidthLedger
{
public:
    /** Charge a message once to the sender (up) and once to the receiver (down). */
    void Record(NodeId from, NodeId to, const Message& msg);
    void Add(NodeId node, size_t kind, Direction dir, uint64_t bytes);

    ByteCount Get(NodeId node, size_t kind, Direction dir) const;
    ByteCount Total(NodeId node, Direction dir) const;
    size_t NodeCount() const { return m_nodes.size(); }

    /** Bytes of block fallback traffic, by block. */
    const std::map<BlockId, uint64_t>& FallbackBytes() const { return m_fallback; }

    /** Rows (node, kind, direction) with a nonzero count, in node then kind order. */
    template <typename F>
    void ForEachRow(F&& f) const
    {
        for (size_t node = 0; node < m_nodes.size(); ++node) {
            for (size_t kind = 0; kind < BANDWIDTH_KIND_COUNT; ++kind) {
                for (Direction dir : {Direction::UP, Direction::DOWN}) {
                    const ByteCount& c = m_nodes[node][kind][dir == Direction::UP ? 0 : 1];
                    if (c.count > 0) f(NodeId(node), kind, dir, c);
                }
            }
        }
    }

private:
    using KindTable = std::array<std::array<ByteCount, 2>, BANDWIDTH_KIND_COUNT>;
    std::vector<KindTable> m_nodes;
    std::map<BlockId, uint64_t> m_fallback;
};

BandwidthLedger BandwidthReport(const std::vector<TraceMessage>& trace);

//
// CSV
//

void WriteOutcomesCsv(std::ostream& os, const std::vector<BlockOutcome>& outcomes);
/** One row per outcome, rates computed per node in block_time order. */
void WriteRatesCsv(std::ostream& os, const std::vector<BlockOutcome>& outcomes, size_t window = 36);
void WriteBandwidthCsv(std::ostream& os, const BandwidthLedger& ledger);
void WriteSummaryCsv(std::ostream& os, const std::string& scenario, const RunSummary& summary);

struct SummaryRow {
    std::string scenario;
    NodeId node{0};
    uint64_t blocks{0};
    uint64_t successes{0};
    /** Percent. */
    double avg_rate{0};
};

struct SummaryTable {
    std::string scenario;
    std::vector<SummaryRow> nodes;
    double gap_pp{0};
};

class SchemaError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/** Throws SchemaError on a wrong header, malformed row, or missing gap row. */
SummaryTable ReadSummaryCsv(std::istream& is);
std::vector<BlockOutcome> ReadOutcomesCsv(std::istream& is);

std::vector<std::string> SplitCsvLine(const std::string& line);

} // namespace churnsim

#endif // CHURNSIM_METRICS_H
