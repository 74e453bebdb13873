// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "util.h"

#include <churnsim/metrics.h>
#include <churnsim/netsim.h>
#include <churnsim/scenario.h>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

using namespace churnsim;
using namespace churnsim::test;

namespace {

std::string RandomString(Rng& rng, size_t max_len)
{
    static const std::string alphabet = "abcXYZ019_-.:/ =%,\t";
    std::string s;
    const size_t len = rng.UniformInt(0, max_len);
    for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.UniformInt(0, alphabet.size() - 1)]);
    return s;
}

std::string RandomKey(Rng& rng)
{
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_";
    std::string s;
    const size_t len = rng.UniformInt(1, 10);
    for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.UniformInt(0, alphabet.size() - 1)]);
    return s == "detail" ? "details" : s;
}

std::vector<BlockOutcome> Outcomes(NodeId node, size_t total, size_t successes)
{
    std::vector<BlockOutcome> out(total);
    for (size_t i = 0; i < total; ++i) {
        out[i].node = node;
        out[i].block_time = i;
        out[i].success = i < successes;
    }
    return out;
}

std::string Round2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

TEST_CASE("log: compact success line")
{
    BlockId id;
    id.bytes[0] = 0xab;
    LogEntry e{1234, 2, "cmpct_success", {{"block", id.ToHex()}, {"missing", "0"}}, std::nullopt};
    const std::string line = FormatLogLine(e);
    CHECK(line.rfind("time=1234 node=2 kind=cmpct_success ", 0) == 0);
    CHECK(line.find("block=" + id.ToHex()) != std::string::npos);
    CHECK(ParseLogLine(line) == e);
}

TEST_CASE("log: escaping and malformed lines")
{
    CHECK(EscapeLogValue("a b=c%d,e") == "a%20b%3Dc%25d%2Ce");
    CHECK(UnescapeLogValue("a%20b%3Dc%25d%2Ce") == "a b=c%d,e");
    CHECK(FormatLogLine({0, 0, "k", {{"v", ""}}, std::nullopt}) == "time=0 node=0 kind=k v=");
    CHECK_THROWS_AS(ParseLogLine("time=1 node=2"), std::invalid_argument);
    CHECK_THROWS_AS(ParseLogLine("node=1 time=2 kind=x"), std::invalid_argument);
    CHECK_THROWS_AS(ParseLogLine("time=x node=2 kind=y"), std::invalid_argument);
    CHECK_THROWS_AS(ParseLogLine("time=1 node=2 kind=y detail=a k=v"), std::invalid_argument);
    CHECK_THROWS_AS(ParseLogLine("time=1 node=2 kind=y junk"), std::invalid_argument);
    CHECK_THROWS_AS(UnescapeLogValue("%4"), std::invalid_argument);
    CHECK_THROWS_AS(FormatLogLine({0, 0, "k", {{"a b", "v"}}, std::nullopt}), std::invalid_argument);
    CHECK_THROWS_AS(FormatLogLine({0, 0, "k", {{"detail", "v"}}, std::nullopt}), std::invalid_argument);
}

TEST_CASE("log: random entries round trip")
{
    Rng rng(11);
    std::ostringstream main;
    EventLog log(&main, nullptr);
    std::vector<LogEntry> written;
    for (int i = 0; i < 10000; ++i) {
        LogEntry e;
        e.time = SimTime(rng.UniformInt(0, 1ULL << 40)) - (i % 7 == 0 ? 1000 : 0);
        e.node = NodeId(rng.UniformInt(0, 1000));
        e.kind = RandomKey(rng);
        const size_t attrs = rng.UniformInt(0, 6);
        for (size_t a = 0; a < attrs; ++a) e.attrs.emplace_back(RandomKey(rng), RandomString(rng, 12));
        if (rng.Bernoulli(0.3)) e.detail = RandomString(rng, 8);
        log.Record(e);
        written.push_back(e);
    }
    CHECK(log.EntryCount() == 10000);

    std::istringstream is(main.str());
    std::string line;
    size_t i = 0;
    while (std::getline(is, line)) {
        REQUIRE(i < written.size());
        CHECK(ParseLogLine(line) == written[i]);
        ++i;
    }
    CHECK(i == written.size());
}

TEST_CASE("log: detail records round trip")
{
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        DetailRecord r{RandomString(rng, 6), RandomKey(rng), {}};
        const size_t n = rng.UniformInt(0, 5);
        for (size_t j = 0; j < n; ++j) r.values.push_back(RandomString(rng, 5));
        // an empty single value is indistinguishable from no values
        if (r.values.size() == 1 && r.values[0].empty()) r.values.clear();
        CHECK(ParseDetailLine(FormatDetailLine(r)) == r);
    }
}

TEST_CASE("log: sink failure propagates")
{
    std::ostringstream os;
    os.setstate(std::ios::badbit);
    EventLog log(&os, &os);
    CHECK_THROWS_AS(log.Record({0, 0, "x", {}, std::nullopt}), std::runtime_error);
    CHECK_THROWS_AS(log.RecordDetail({"a", "b", {}}), std::runtime_error);
    EventLog quiet(nullptr, nullptr);
    CHECK_NOTHROW(quiet.Record({0, 0, "x", {}, std::nullopt}));
}

TEST_CASE("moving average: fixed cases")
{
    std::vector<bool> ones(36, true);
    CHECK(MovingSuccessRate(ones)[35] == 1.0);

    std::vector<bool> alt(36);
    for (size_t i = 0; i < 36; ++i) alt[i] = i % 2 == 0;
    CHECK(MovingSuccessRate(alt)[35] == 0.5);

    std::vector<bool> prefix{true, false, false, true};
    std::vector<double> r = MovingSuccessRate(prefix);
    CHECK(r == std::vector<double>{1.0, 0.5, 1.0 / 3, 0.5});
    CHECK(MovingSuccessRate(std::vector<bool>{}).empty());
    CHECK_THROWS_AS(MovingSuccessRate(prefix, 0), std::invalid_argument);

    std::vector<bool> c{false, false, true, true, true};
    CHECK(MovingSuccessRate(c, 3, true) == std::vector<double>{0.0, 1.0 / 3, 2.0 / 3, 1.0, 1.0});
}

TEST_CASE("moving average: equals direct window sums")
{
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = rng.UniformInt(0, 300);
        const size_t window = rng.UniformInt(1, 60);
        std::vector<bool> s(n);
        for (size_t i = 0; i < n; ++i) s[i] = rng.Bernoulli(rng.Uniform01());
        std::vector<double> rates = MovingSuccessRate(s, window);
        REQUIRE(rates.size() == n);
        for (size_t i = 0; i < n; ++i) {
            size_t count = 0, hits = 0;
            for (size_t j = 0; j <= i; ++j) {
                if (i - j < window) {
                    ++count;
                    hits += s[j];
                }
            }
            CHECK(rates[i] == double(hits) / double(count));
            CHECK(rates[i] >= 0.0);
            CHECK(rates[i] <= 1.0);
        }
    }
}

TEST_CASE("summarize: table fixture")
{
    RunSummary nosync = Summarize(Outcomes(1, 740, 661), Outcomes(2, 750, 544));
    CHECK(Round2(nosync.a.avg_rate * 100) == "89.32");
    CHECK(Round2(nosync.b.avg_rate * 100) == "72.53");
    CHECK(Round2(nosync.gap_pp) == "16.79");
    CHECK(nosync.a.blocks == 740);
    CHECK(nosync.b.successes == 544);

    RunSummary sync = Summarize(Outcomes(1, 740, 627), Outcomes(2, 750, 542));
    CHECK(Round2(sync.a.avg_rate * 100) == "84.73");
    CHECK(Round2(sync.b.avg_rate * 100) == "72.27");
    CHECK(Round2(sync.gap_pp) == "12.46");
}

TEST_CASE("summarize: identical vectors, first_n, and errors")
{
    auto a = Outcomes(1, 800, 500);
    auto b = Outcomes(2, 800, 500);
    RunSummary s = Summarize(a, b);
    CHECK(s.gap_pp == 0.0);
    CHECK(s.a.blocks == 750);
    CHECK(s.a.successes == 500);
    CHECK(Summarize(a, b, 10).a.avg_rate == 1.0);
    CHECK_THROWS_AS(Summarize({}, b), InsufficientData);
    CHECK_THROWS_AS(Summarize(a, {}), InsufficientData);
}

TEST_CASE("summarize: matches direct counting")
{
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<BlockOutcome> v[2];
        for (int k = 0; k < 2; ++k) {
            const size_t n = rng.UniformInt(1, 900);
            v[k] = Outcomes(NodeId(k + 1), n, 0);
            for (auto& o : v[k]) o.success = rng.Bernoulli(0.8);
        }
        const size_t first_n = rng.UniformInt(1, 900);
        RunSummary s = Summarize(v[0], v[1], first_n);
        double rate[2];
        for (int k = 0; k < 2; ++k) {
            size_t count = 0, hits = 0;
            for (const auto& o : v[k]) {
                if (count == first_n) break;
                ++count;
                hits += o.success;
            }
            rate[k] = double(hits) / double(count);
        }
        CHECK(s.a.avg_rate == rate[0]);
        CHECK(s.b.avg_rate == rate[1]);
        CHECK(s.gap_pp == doctest::Approx(std::abs(rate[0] - rate[1]) * 100).epsilon(1e-12));
    }
}

TEST_CASE("bandwidth: direction, kind and fallback accounting")
{
    BandwidthLedger ledger;
    Rng rng(15);
    InvMsg inv{RandomIds(rng, 1000), false};
    ledger.Record(1, 2, Message(inv));
    CHECK(ledger.Get(1, Message(inv).index(), Direction::UP) == ByteCount{32008, 1});
    CHECK(ledger.Get(2, Message(inv).index(), Direction::DOWN) == ByteCount{32008, 1});
    CHECK(ledger.Get(1, Message(inv).index(), Direction::DOWN) == ByteCount{});

    InvMsg sync_inv{RandomIds(rng, 10), true};
    ledger.Record(2, 1, Message(sync_inv));
    CHECK(ledger.Get(2, INV_SYNC_KIND, Direction::UP) == ByteCount{8 + 32 * 10, 1});
    CHECK(BandwidthKindName(INV_SYNC_KIND) == "inv_sync");

    ledger.Record(1, 2, Message(GetDataMsg{RandomIds(rng, 10)}));
    CHECK(ledger.Total(1, Direction::UP) == ByteCount{32008 + 48, 2});

    BlockId b;
    b.bytes[3] = 9;
    Message gbt = GetBlockTxnMsg{b, {1, 2, 3}};
    ledger.Record(2, 1, gbt);
    Message btx = BlockTxnMsg{b, {RandomTx(rng)}};
    ledger.Record(1, 2, btx);
    REQUIRE(ledger.FallbackBytes().count(b));
    CHECK(ledger.FallbackBytes().at(b) == WireSize(gbt) + WireSize(btx));
    CHECK(ledger.FallbackBytes().size() == 1);
}

TEST_CASE("bandwidth: report over a trace equals per-message sums")
{
    Rng rng(16);
    std::vector<TraceMessage> trace;
    std::map<std::pair<NodeId, size_t>, uint64_t> up, down;
    for (int i = 0; i < 500; ++i) {
        NodeId from = NodeId(rng.UniformInt(0, 4)), to = NodeId(rng.UniformInt(0, 4));
        MessageRef msg;
        switch (rng.UniformInt(0, 3)) {
        case 0: msg = std::make_shared<const Message>(InvMsg{RandomIds(rng, rng.UniformInt(0, 50)), rng.Bernoulli(0.5)}); break;
        case 1: msg = std::make_shared<const Message>(GetDataMsg{RandomIds(rng, rng.UniformInt(0, 50))}); break;
        case 2: msg = std::make_shared<const Message>(TxMsg{RandomTx(rng)}); break;
        default: msg = std::make_shared<const Message>(TxMempoolSyncMsg{}); break;
        }
        up[{from, BandwidthKind(*msg)}] += WireSize(*msg);
        down[{to, BandwidthKind(*msg)}] += WireSize(*msg);
        trace.push_back({from, to, msg});
    }
    BandwidthLedger ledger = BandwidthReport(trace);
    size_t rows = 0;
    ledger.ForEachRow([&](NodeId node, size_t kind, Direction dir, const ByteCount& c) {
        ++rows;
        CHECK(c.bytes == (dir == Direction::UP ? up : down)[{node, kind}]);
    });
    CHECK(rows > 0);
    for (const auto& [key, bytes] : up) CHECK(ledger.Get(key.first, key.second, Direction::UP).bytes == bytes);
    for (const auto& [key, bytes] : down) CHECK(ledger.Get(key.first, key.second, Direction::DOWN).bytes == bytes);
}

TEST_CASE("csv: headers and outcome round trip")
{
    Rng rng(17);
    std::vector<BlockOutcome> outcomes;
    for (int i = 0; i < 200; ++i) {
        BlockOutcome o;
        o.node = NodeId(rng.UniformInt(0, 20));
        o.block_time = rng.UniformInt(0, 1000);
        o.block_id.bytes[0] = uint8_t(i);
        o.block_id.bytes[31] = uint8_t(rng.Next());
        o.protocol = RelayMode(rng.UniformInt(0, 2));
        o.success = rng.Bernoulli(0.5);
        o.missing = uint32_t(rng.UniformInt(0, 100));
        o.round_trips = uint32_t(rng.UniformInt(0, 3));
        o.bytes_down = rng.UniformInt(0, 1 << 30);
        o.bytes_up = rng.UniformInt(0, 1 << 30);
        outcomes.push_back(o);
    }
    std::stringstream ss;
    WriteOutcomesCsv(ss, outcomes);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "node,block_time,block_id,protocol,success,missing,round_trips,bytes_down,bytes_up");
    ss.seekg(0);
    CHECK(ReadOutcomesCsv(ss) == outcomes);

    std::stringstream bad("node,block_time\n1,2\n");
    CHECK_THROWS_AS(ReadOutcomesCsv(bad), SchemaError);
    std::stringstream short_row(header + "\n1,2,3\n");
    CHECK_THROWS_AS(ReadOutcomesCsv(short_row), SchemaError);
}

TEST_CASE("csv: rates, bandwidth and summary")
{
    std::vector<BlockOutcome> outcomes = Outcomes(3, 4, 2);
    std::vector<BlockOutcome> other = Outcomes(1, 2, 1);
    outcomes.insert(outcomes.begin(), other.begin(), other.end());
    std::ostringstream rates;
    WriteRatesCsv(rates, outcomes);
    CHECK(rates.str() == "node,block_time,rate36\n"
                         "1,0,1.000000\n1,1,0.500000\n"
                         "3,0,1.000000\n3,1,1.000000\n3,2,0.666667\n3,3,0.500000\n");

    BandwidthLedger ledger;
    ledger.Record(0, 1, Message(GetDataMsg{{TxId{}}}));
    std::ostringstream bw;
    WriteBandwidthCsv(bw, ledger);
    CHECK(bw.str() == "node,kind,direction,bytes,count\n0,getdata,up,12,1\n1,getdata,down,12,1\n");

    RunSummary s = Summarize(Outcomes(1, 740, 661), Outcomes(2, 750, 544));
    std::stringstream sum;
    WriteSummaryCsv(sum, "x", s);
    CHECK(sum.str() == "scenario,node,blocks,successes,avg_rate\n"
                       "x,1,740,661,89.3243\nx,2,750,544,72.5333\nx,gap_pp,,,16.7910\n");
    SummaryTable t = ReadSummaryCsv(sum);
    CHECK(t.scenario == "x");
    REQUIRE(t.nodes.size() == 2);
    CHECK(t.nodes[1].successes == 544);
    CHECK(t.gap_pp == doctest::Approx(16.791));

    std::stringstream no_gap("scenario,node,blocks,successes,avg_rate\nx,1,1,1,100\n");
    CHECK_THROWS_AS(ReadSummaryCsv(no_gap), SchemaError);
    std::stringstream mixed("scenario,node,blocks,successes,avg_rate\nx,1,1,1,100\ny,gap_pp,,,0\n");
    CHECK_THROWS_AS(ReadSummaryCsv(mixed), SchemaError);
    std::ostringstream sink;
    CHECK_THROWS_AS(WriteSummaryCsv(sink, "a,b", s), std::invalid_argument);
}

TEST_CASE("csv: table fixtures parse")
{
    std::ifstream a(std::string(CHURNSIM_FIXTURES) + "/table2_nosync/summary.csv");
    SummaryTable t = ReadSummaryCsv(a);
    REQUIRE(t.nodes.size() == 2);
    CHECK(t.nodes[0].successes == 661);
    CHECK(t.gap_pp == 16.79);
}

TEST_CASE("outcomes agree with the trace and the detail log")
{
    ScenarioConfig sc;
    sc.seed = 5;
    sc.blocks_to_run = 30;
    sc.inv_interval = 2;
    sc.warm_mempool_size = 500;
    sc.churn.push_back({2, 60, 0.9, 0});
    WorldConfig cfg = MakeWorldConfig(sc, 1, false);
    cfg.record_trace = true;
    std::ostringstream main, detail;
    EventLog log(&main, &detail);
    World world(cfg, &log);
    world.SpawnProcesses();
    world.Run({sc.blocks_to_run, 5000});

    // first GetBlockTxn each node sent for each block
    std::map<std::pair<NodeId, BlockId>, std::vector<uint32_t>> requested;
    for (const TraceMessage& t : world.Trace()) {
        if (const auto* g = std::get_if<GetBlockTxnMsg>(t.msg.get())) requested.try_emplace({t.from, g->id}, g->indexes);
    }
    std::map<std::pair<NodeId, BlockId>, BlockOutcome> outcome;
    for (const BlockOutcome& o : world.Outcomes()) outcome[{o.node, o.block_id}] = o;

    size_t checked = 0;
    for (const auto& [key, indexes] : requested) {
        REQUIRE(outcome.count(key));
        const BlockOutcome& o = outcome.at(key);
        CHECK(!o.success);
        CHECK(o.missing == indexes.size());
        ++checked;
    }
    CHECK(checked > 0);
    for (const BlockOutcome& o : world.Outcomes()) {
        if (o.success) CHECK(o.round_trips == 0);
    }

    // every failed compact line links a detail record listing the requested indexes
    std::map<std::string, DetailRecord> details;
    std::istringstream ds(detail.str());
    std::string line;
    while (std::getline(ds, line)) {
        DetailRecord r = ParseDetailLine(line);
        details[r.id] = r;
    }
    std::istringstream ms(main.str());
    size_t linked = 0;
    while (std::getline(ms, line)) {
        LogEntry e = ParseLogLine(line);
        if (e.kind != "cmpct_fail" || !e.detail) continue;
        REQUIRE(details.count(*e.detail));
        const DetailRecord& r = details.at(*e.detail);
        CHECK(r.kind == "requested_indexes");
        BlockId id;
        for (const auto& [k, v] : e.attrs) {
            if (k == "block") id = BlockId::FromHex(v);
        }
        auto it = requested.find({e.node, id});
        REQUIRE(it != requested.end());
        std::vector<std::string> want;
        for (uint32_t i : it->second) want.push_back(std::to_string(i));
        CHECK(r.values == want);
        ++linked;
    }
    CHECK(linked > 0);
}
