// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "util.h"

#include <churnsim/netsim.h>
#include <churnsim/scenario.h>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

using namespace churnsim;
using namespace churnsim::test;

namespace {

Topology Pair(SimTime latency)
{
    Topology t(2);
    t.AddEdge(0, 1, latency);
    return t;
}

/** Arrival processes slow enough that a short run sees none. */
ArrivalConfig Quiet()
{
    ArrivalConfig a;
    a.tx_rate = 1e-6;
    a.block_interval_mean = 1e9;
    a.time_scale = 1.0;
    return a;
}

/** Times of block_mined entries in a captured log. */
std::vector<SimTime> MinedTimes(const std::string& log)
{
    std::vector<SimTime> out;
    std::istringstream is(log);
    std::string line;
    while (std::getline(is, line)) {
        LogEntry e = ParseLogLine(line);
        if (e.kind == "block_mined") out.push_back(e.time);
    }
    return out;
}

ScenarioConfig SmallRun(uint64_t seed)
{
    ScenarioConfig c;
    c.seed = seed;
    c.blocks_to_run = 20;
    c.inv_interval = 2;
    c.warm_mempool_size = 500;
    c.churn.push_back({2, 60, 0.9, 0});
    c.sync = true;
    c.sync_nodes = {1, 2};
    c.trigger_limit = 1000;
    return c;
}

} // namespace

TEST_CASE("topology: out-degrees in range and deterministic in the seed")
{
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Topology t = BuildTopology(20, 8, 12, {30, 70}, seed);
        REQUIRE(t.Size() == 20);
        for (NodeId n = 0; n < 20; ++n) {
            const auto& out = t.Outbound(n);
            CHECK(out.size() >= 8);
            CHECK(out.size() <= 12);
            std::set<NodeId> distinct(out.begin(), out.end());
            CHECK(distinct.size() == out.size());
            CHECK(!distinct.count(n));
            for (NodeId m : out) {
                SimTime lat = *t.Latency(n, m);
                CHECK(lat >= 30);
                CHECK(lat <= 70);
                CHECK(t.Latency(m, n) == lat);
            }
        }
        CHECK(t.IsWeaklyConnected());
        CHECK(BuildTopology(20, 8, 12, {30, 70}, seed) == t);
    }
    CHECK(!(BuildTopology(20, 8, 12, {30, 70}, 1) == BuildTopology(20, 8, 12, {30, 70}, 2)));
}

TEST_CASE("topology: in-degree sum equals out-degree sum")
{
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Topology t = BuildTopology(20, 8, 12, {30, 70}, seed);
        size_t out_sum = 0, in_sum = 0;
        for (NodeId n = 0; n < 20; ++n) {
            out_sum += t.Outbound(n).size();
            // count inbound edges by scanning every outbound list
            for (NodeId m = 0; m < 20; ++m) {
                const auto& o = t.Outbound(m);
                in_sum += size_t(std::count(o.begin(), o.end(), n));
            }
            const std::vector<NodeId> nb = t.Neighbors(n);
            CHECK(t.Inbound(n).size() ==
                  size_t(std::count_if(nb.begin(), nb.end(), [&](NodeId m) { return t.HasEdge(m, n); })));
        }
        CHECK(in_sum == out_sum);
        CHECK(out_sum == t.EdgeCount());
    }
}

TEST_CASE("topology: parameter errors")
{
    CHECK_THROWS_AS(BuildTopology(12, 8, 12, {30, 70}, 1), std::invalid_argument);
    CHECK_THROWS_AS(BuildTopology(5, 8, 12, {30, 70}, 1), std::invalid_argument);
    CHECK_THROWS_AS(BuildTopology(20, 0, 12, {30, 70}, 1), std::invalid_argument);
    CHECK_THROWS_AS(BuildTopology(20, 9, 8, {30, 70}, 1), std::invalid_argument);
    CHECK_NOTHROW(BuildTopology(13, 8, 12, {30, 70}, 1));

    Topology t(3);
    CHECK(t.AddEdge(0, 1, 40));
    CHECK(!t.AddEdge(0, 1, 40));
    CHECK(t.AddEdge(1, 0, 99));
    CHECK(t.Latency(0, 1) == 40);
    CHECK(!t.Latency(0, 2));
    CHECK_THROWS_AS(t.AddEdge(1, 1, 40), std::invalid_argument);
    CHECK(!t.IsWeaklyConnected());
}

TEST_CASE("churn: state at fixed times")
{
    ChurnSchedule s{0, 600000, 0.9, 0};
    CHECK(ChurnOnline(s, 0));
    CHECK(ChurnOnline(s, 539999));
    CHECK(!ChurnOnline(s, 540000));
    CHECK(!ChurnOnline(s, 570000));
    CHECK(ChurnOnline(s, 600000));
    CHECK(ChurnNextTransition(s, 0) == 540000);
    CHECK(ChurnNextTransition(s, 540000) == 600000);
    CHECK(ChurnNextTransition(s, 599999) == 600000);

    ChurnSchedule shifted{0, 600000, 0.9, 100000};
    CHECK(ChurnOnline(shifted, 0));
    CHECK(!ChurnOnline(shifted, 440000));
    CHECK(ChurnNextTransition(shifted, 0) == 440000);

    ChurnSchedule always{0, 600000, 1.0, 0};
    CHECK(ChurnNextTransition(always, 0) == std::numeric_limits<SimTime>::max());

    CHECK_THROWS_AS(ValidateChurn({0, 0, 0.9, 0}), std::invalid_argument);
    CHECK_THROWS_AS(ValidateChurn({0, 600, 0.0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(ValidateChurn({0, 600, 1.5, 0}), std::invalid_argument);
}

TEST_CASE("churn: long-run online fraction")
{
    ChurnSchedule s{0, 600000, 0.9, 0};
    Rng rng(42);
    const int samples = 1000000;
    int online = 0;
    for (int i = 0; i < samples; ++i) {
        if (ChurnOnline(s, SimTime(rng.UniformInt(0, 1000000000)))) ++online;
    }
    CHECK(std::abs(double(online) / samples - 0.9) <= 0.002);
}

TEST_CASE("churn: transitions agree with the closed form")
{
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        ChurnSchedule s{0, SimTime(rng.UniformInt(10, 5000)), rng.Uniform(0.05, 0.95), SimTime(rng.UniformInt(0, 5000))};
        SimTime t = SimTime(rng.UniformInt(0, 100000));
        SimTime next = ChurnNextTransition(s, t);
        REQUIRE(next > t);
        CHECK(ChurnOnline(s, next) != ChurnOnline(s, t));
        CHECK(ChurnOnline(s, next - 1) == ChurnOnline(s, t));
    }
}

TEST_CASE("run: one delivery, one handle, then the queue drains")
{
    WorldConfig cfg;
    cfg.topology = Pair(50);
    cfg.arrivals = Quiet();
    World world(cfg);
    int handled = 0;
    world.on_handle = [&](SimTime t, NodeId from, NodeId to, const Message&) {
        ++handled;
        CHECK(t == 10);
        CHECK(from == 0);
        CHECK(to == 1);
    };
    world.ScheduleDeliver(10, 0, 1, std::make_shared<const Message>(InvMsg{}));
    world.Run({});
    CHECK(handled == 1);
    CHECK(world.Stats().events == 1);
    CHECK(world.Stats().delivered == 1);
    CHECK(world.Now() == 10);
}

TEST_CASE("run: delivery into a down-window is dropped and counted as lost")
{
    WorldConfig cfg;
    cfg.topology = Pair(50);
    cfg.arrivals = Quiet();
    // node 1 starts 1 s into its 6 s outage
    cfg.churn.push_back({1, 60000, 0.9, 55000});
    std::ostringstream main;
    EventLog log(&main, nullptr);
    World world(cfg, &log);
    REQUIRE(!world.IsOnline(1));
    int handled = 0;
    world.on_handle = [&](SimTime, NodeId, NodeId, const Message&) { ++handled; };
    world.ScheduleDeliver(100, 0, 1, std::make_shared<const Message>(InvMsg{}));
    world.SpawnProcesses();
    world.Run({0, 5000, 10000});
    CHECK(handled == 0);
    CHECK(world.Stats().dropped == 1);
    CHECK(world.Stats().offline_handled == 0);
    CHECK(world.IsOnline(1));
    CHECK(main.str().find("kind=node_up lost=1") != std::string::npos);
}

TEST_CASE("run: a transaction reaches the second node after three latencies")
{
    const SimTime latency = 50;
    WorldConfig cfg;
    cfg.topology = Pair(latency);
    cfg.arrivals = Quiet();
    World world(cfg);
    std::vector<std::pair<SimTime, size_t>> seen;
    world.on_handle = [&](SimTime t, NodeId, NodeId, const Message& m) { seen.emplace_back(t, m.index()); };
    Rng rng(3);
    TxRef tx = RandomTx(rng);
    world.ScheduleTransaction(0, 0, tx);

    world.Run({0, 0, 3 * latency - 1});
    CHECK(!world.GetNode(1).GetMempool().Contains(tx->id));
    world.Run({});
    CHECK(world.GetNode(1).GetMempool().Contains(tx->id));
    REQUIRE(seen.size() == 3);
    CHECK(seen[0] == std::pair<SimTime, size_t>{latency, Message(InvMsg{}).index()});
    CHECK(seen[1] == std::pair<SimTime, size_t>{2 * latency, Message(GetDataMsg{}).index()});
    CHECK(seen[2] == std::pair<SimTime, size_t>{3 * latency, Message(TxMsg{}).index()});
}

TEST_CASE("arrivals: Poisson transaction count")
{
    WorldConfig cfg;
    cfg.topology = Pair(50);
    cfg.arrivals.tx_rate = 5;
    cfg.arrivals.block_interval_mean = 1e9;
    cfg.arrivals.time_scale = 1;
    World world(cfg);
    world.SpawnProcesses();
    world.Run({0, 0, 1000 * 1000});
    const double expected = 5000;
    CHECK(std::abs(double(world.Stats().txs_created) - expected) <= 3 * std::sqrt(expected));
}

TEST_CASE("arrivals: mean block interval and time compression")
{
    auto mined = [](double time_scale, SimTime until) {
        WorldConfig cfg;
        cfg.topology = Pair(50);
        cfg.arrivals.tx_rate = 1e-6;
        cfg.arrivals.block_interval_mean = 600;
        cfg.arrivals.time_scale = time_scale;
        std::ostringstream main;
        EventLog log(&main, nullptr);
        World world(cfg, &log);
        world.SpawnProcesses();
        world.Run({75, 0, until});
        return MinedTimes(main.str());
    };
    std::vector<SimTime> slow = mined(1, std::numeric_limits<SimTime>::max());
    REQUIRE(slow.size() == 75);
    const double mean_s = double(slow.back()) / 75 / 1000;
    const double sigma = 600 / std::sqrt(75.0);
    CHECK(std::abs(mean_s - 600) <= 3 * sigma);

    std::vector<SimTime> fast = mined(10, std::numeric_limits<SimTime>::max());
    REQUIRE(fast.size() == slow.size());
    for (size_t i = 0; i < fast.size(); ++i) {
        // each gap rounds to whole milliseconds at both scales
        CHECK(std::abs(double(slow[i]) - 10.0 * double(fast[i])) <= 11.0 * double(i + 1));
    }
    CHECK(ScaledMillis(600, 10) == 60000);
    CHECK(ScaledMillis(2, 10) == 200);
}

TEST_CASE("world: configuration errors")
{
    WorldConfig cfg;
    cfg.topology = Pair(50);
    cfg.miner = 2;
    CHECK_THROWS_AS(World{cfg}, std::invalid_argument);
    cfg.miner = 0;
    cfg.arrivals.tx_rate = 0;
    CHECK_THROWS_AS(World{cfg}, std::invalid_argument);
    cfg.arrivals.tx_rate = 2;
    cfg.churn.push_back({0, 60000, 0.9, 0});
    CHECK_THROWS_AS(World{cfg}, std::invalid_argument);
    cfg.churn = {{1, 60000, 0.9, 0}, {1, 60000, 0.9, 0}};
    CHECK_THROWS_AS(World{cfg}, std::invalid_argument);
    cfg.churn.clear();
    cfg.trigger_limit = 0;
    CHECK_THROWS_AS(World{cfg}, std::invalid_argument);
}

TEST_CASE("world: determinism, causality, churn gate and block provenance")
{
    for (uint64_t seed : {1, 2}) {
        const ScenarioConfig sc = SmallRun(seed);
        auto run = [&](std::vector<std::string>* violations) {
            WorldConfig cfg = MakeWorldConfig(sc, *sc.trigger_limit, true);
            cfg.record_trace = true;
            auto world = std::make_unique<World>(cfg);
            World* w = world.get();
            world->on_handle = [w, violations](SimTime t, NodeId from, NodeId to, const Message&) {
                if (!w->IsOnline(to) || !w->IsOnline(from)) {
                    violations->push_back(std::to_string(t) + ":" + std::to_string(from) + "->" + std::to_string(to));
                }
            };
            world->SpawnProcesses();
            world->Run({sc.blocks_to_run, 5000});
            return world;
        };
        std::vector<std::string> v1, v2;
        auto a = run(&v1);
        auto b = run(&v2);
        CHECK(v1.empty());
        CHECK(a->Digest() == b->Digest());
        CHECK(a->Outcomes() == b->Outcomes());
        CHECK(a->Stats().events == b->Stats().events);
        CHECK(a->MinedBlocks() == b->MinedBlocks());

        const WorldStats& s = a->Stats();
        CHECK(s.blocks_mined == sc.blocks_to_run);
        CHECK(s.causality_violations == 0);
        CHECK(s.offline_handled == 0);
        CHECK(s.untraceable_blocks == 0);
        CHECK(s.dropped > 0);
        CHECK(s.sync_fired[1] > 0);
        CHECK(s.sync_fired[0] == 0);
        CHECK(s.delivered == a->Trace().size());

        // every block a node observed came out of the miner, once
        std::set<BlockId> mined(a->MinedBlocks().begin(), a->MinedBlocks().end());
        CHECK(mined.size() == a->MinedBlocks().size());
        for (const BlockOutcome& o : a->Outcomes()) CHECK(mined.count(o.block_id));
        for (NodeId n = 1; n < a->Size(); ++n) {
            std::set<BlockId> seen;
            for (const BlockOutcome& o : a->OutcomesFor(n)) CHECK(seen.insert(o.block_id).second);
        }
    }
}
