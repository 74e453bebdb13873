// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/metrics.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace churnsim {

namespace {

const char* OUTCOMES_HEADER = "node,block_time,block_id,protocol,success,missing,round_trips,bytes_down,bytes_up";
const char* RATES_HEADER = "node,block_time,rate36";
const char* BANDWIDTH_HEADER = "node,kind,direction,bytes,count";
const char* SUMMARY_HEADER = "scenario,node,blocks,successes,avg_rate";

std::string Fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

template <typename T>
T ParseField(const std::string& s, const char* what)
{
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw SchemaError(std::string("bad ") + what + ": '" + s + "'");
    return value;
}

double ParseDouble(const std::string& s, const char* what)
{
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw SchemaError(std::string("bad ") + what + ": '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw SchemaError(std::string("bad ") + what + ": '" + s + "'");
    }
}

bool ReadLine(std::istream& is, std::string& line)
{
    if (!std::getline(is, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void ExpectHeader(std::istream& is, const char* header)
{
    std::string line;
    if (!ReadLine(is, line)) throw SchemaError("empty CSV");
    if (line != header) throw SchemaError("unexpected header: '" + line + "'");
}

} // namespace

std::vector<std::string> SplitCsvLine(const std::string& line)
{
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = line.find(',', pos);
        out.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

void WriteOutcomesCsv(std::ostream& os, const std::vector<BlockOutcome>& outcomes)
{
    os << OUTCOMES_HEADER << '\n';
    for (const BlockOutcome& o : outcomes) {
        os << o.node << ',' << o.block_time << ',' << o.block_id.ToHex() << ',' << RelayModeName(o.protocol) << ','
           << (o.success ? 1 : 0) << ',' << o.missing << ',' << o.round_trips << ',' << o.bytes_down << ','
           << o.bytes_up << '\n';
    }
}

void WriteRatesCsv(std::ostream& os, const std::vector<BlockOutcome>& outcomes, size_t window)
{
    std::map<NodeId, std::vector<BlockOutcome>> by_node;
    for (const BlockOutcome& o : outcomes) by_node[o.node].push_back(o);
    os << RATES_HEADER << '\n';
    for (auto& [node, list] : by_node) {
        std::stable_sort(list.begin(), list.end(),
                         [](const BlockOutcome& a, const BlockOutcome& b) { return a.block_time < b.block_time; });
        std::vector<double> rates = MovingSuccessRate(list, window);
        for (size_t i = 0; i < list.size(); ++i) {
            os << node << ',' << list[i].block_time << ',' << Fixed(rates[i], 6) << '\n';
        }
    }
}

void WriteBandwidthCsv(std::ostream& os, const BandwidthLedger& ledger)
{
    os << BANDWIDTH_HEADER << '\n';
    ledger.ForEachRow([&](NodeId node, size_t kind, Direction dir, const ByteCount& c) {
        os << node << ',' << BandwidthKindName(kind) << ',' << (dir == Direction::UP ? "up" : "down") << ','
           << c.bytes << ',' << c.count << '\n';
    });
}

void WriteSummaryCsv(std::ostream& os, const std::string& scenario, const RunSummary& summary)
{
    if (scenario.find_first_of(",\n\r") != std::string::npos) throw std::invalid_argument("scenario name contains a delimiter");
    os << SUMMARY_HEADER << '\n';
    for (const NodeSummary& s : {summary.a, summary.b}) {
        os << scenario << ',' << s.node << ',' << s.blocks << ',' << s.successes << ',' << Fixed(s.avg_rate * 100.0, 4)
           << '\n';
    }
    os << scenario << ",gap_pp,,," << Fixed(summary.gap_pp, 4) << '\n';
}

SummaryTable ReadSummaryCsv(std::istream& is)
{
    ExpectHeader(is, SUMMARY_HEADER);
    SummaryTable table;
    bool have_gap = false;
    std::string line;
    while (ReadLine(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = SplitCsvLine(line);
        if (f.size() != 5) throw SchemaError("summary row needs 5 fields: '" + line + "'");
        if (table.scenario.empty()) table.scenario = f[0];
        else if (f[0] != table.scenario) throw SchemaError("mixed scenarios in summary");
        if (f[1] == "gap_pp") {
            if (have_gap) throw SchemaError("duplicate gap_pp row");
            table.gap_pp = ParseDouble(f[4], "gap_pp");
            have_gap = true;
            continue;
        }
        SummaryRow row;
        row.scenario = f[0];
        row.node = ParseField<NodeId>(f[1], "node");
        row.blocks = ParseField<uint64_t>(f[2], "blocks");
        row.successes = ParseField<uint64_t>(f[3], "successes");
        row.avg_rate = ParseDouble(f[4], "avg_rate");
        table.nodes.push_back(row);
    }
    if (!have_gap) throw SchemaError("summary has no gap_pp row");
    return table;
}

std::vector<BlockOutcome> ReadOutcomesCsv(std::istream& is)
{
    ExpectHeader(is, OUTCOMES_HEADER);
    std::vector<BlockOutcome> out;
    std::string line;
    while (ReadLine(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = SplitCsvLine(line);
        if (f.size() != 9) throw SchemaError("outcome row needs 9 fields: '" + line + "'");
        BlockOutcome o;
        o.node = ParseField<NodeId>(f[0], "node");
        o.block_time = ParseField<uint64_t>(f[1], "block_time");
        try {
            o.block_id = BlockId::FromHex(f[2]);
        } catch (const std::exception&) {
            throw SchemaError("bad block_id: '" + f[2] + "'");
        }
        auto mode = ParseRelayMode(f[3]);
        if (!mode) throw SchemaError("bad protocol: '" + f[3] + "'");
        o.protocol = *mode;
        o.success = ParseField<int>(f[4], "success") != 0;
        o.missing = ParseField<uint32_t>(f[5], "missing");
        o.round_trips = ParseField<uint32_t>(f[6], "round_trips");
        o.bytes_down = ParseField<uint64_t>(f[7], "bytes_down");
        o.bytes_up = ParseField<uint64_t>(f[8], "bytes_up");
        out.push_back(o);
    }
    return out;
}

} // namespace churnsim
