// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "util.h"

#include <churnsim/node.h>

#include <doctest.h>

#include <deque>
#include <map>

using namespace churnsim;
using namespace churnsim::test;

namespace {

/** Lossless, zero-latency delivery between a handful of nodes, FIFO. */
struct Net {
    std::map<NodeId, Node> nodes;
    std::deque<std::tuple<NodeId, NodeId, MessageRef>> queue;
    std::vector<BlockObservation> observations;
    std::vector<std::tuple<NodeId, NodeId, MessageRef>> sent;
    int conservation_violations{0};

    Node& Add(NodeId id, RelayConfig cfg = {})
    {
        return nodes.emplace(id, Node(id, cfg)).first->second;
    }
    void Connect(NodeId a, NodeId b)
    {
        nodes.at(a).AddPeer(b, true);
        nodes.at(b).AddPeer(a, false);
    }
    void Take(NodeId from, HandleResult res)
    {
        const Node& sender = nodes.at(from);
        for (Outgoing& o : res.out) {
            // a node never emits a transaction it does not hold
            if (auto* tx = std::get_if<TxMsg>(o.msg.get()); tx && !sender.GetMempool().Find(tx->tx->id)) {
                ++conservation_violations;
            }
            sent.emplace_back(from, o.to, o.msg);
            queue.emplace_back(from, o.to, std::move(o.msg));
        }
        for (BlockObservation& obs : res.observations) observations.push_back(std::move(obs));
    }
    /** Deliver everything; returns the number of messages handled. */
    size_t Pump(bool count_trigger = false)
    {
        size_t n = 0;
        while (!queue.empty()) {
            auto [from, to, msg] = queue.front();
            queue.pop_front();
            Node& dst = nodes.at(to);
            // a node never requests data it already holds
            if (auto* gd = std::get_if<GetDataMsg>(msg.get())) {
                for (const TxId& id : gd->ids) {
                    if (nodes.at(from).GetMempool().Knows(id)) ++conservation_violations;
                }
            }
            Take(to, count_trigger ? dst.Receive(from, *msg, 0) : dst.HandleMessage(from, *msg, 0));
            ++n;
        }
        return n;
    }
};

template <typename T>
std::vector<std::pair<NodeId, const T*>> OfKind(const HandleResult& res)
{
    std::vector<std::pair<NodeId, const T*>> out;
    for (const Outgoing& o : res.out) {
        if (auto* m = std::get_if<T>(o.msg.get())) out.emplace_back(o.to, m);
    }
    return out;
}

/** A mined block over `txs` on top of genesis, already held by node `miner`. */
FullBlockRef MineOn(Node& miner, const std::vector<TxRef>& txs)
{
    for (const TxRef& tx : txs) miner.SubmitTransaction(tx, 0);
    Block b = miner.GetMempool().AssembleBlock(txs.size(), miner.Tip(), miner.TipHeight() + 1);
    std::vector<TxRef> bodies;
    for (const TxId& id : b.txs) bodies.push_back(miner.GetMempool().Get(id));
    return MakeFullBlock(std::move(b), std::move(bodies));
}

} // namespace

TEST_CASE("peers")
{
    Node n(1, RelayConfig{});
    n.AddPeer(2, true);
    n.AddPeer(2, false);
    CHECK(n.Peers().size() == 1);
    CHECK(n.Peers()[0].outbound);
    CHECK_THROWS_AS(n.AddPeer(1, true), std::invalid_argument);
    for (NodeId p = 3; n.Peers().size() < MAX_PEERS; ++p) n.AddPeer(p, false);
    CHECK_THROWS_AS(n.AddPeer(1000, true), std::length_error);
}

TEST_CASE("inv getdata tx exchange")
{
    Net net;
    net.Add(1);
    net.Add(2);
    net.Connect(1, 2);
    Rng rng(1);
    TxRef tx = RandomTx(rng);
    net.Take(1, net.nodes.at(1).SubmitTransaction(tx, 0));
    CHECK(net.Pump() == 3);
    CHECK(net.nodes.at(2).GetMempool().Contains(tx->id));
    CHECK(net.conservation_violations == 0);
    REQUIRE(net.sent.size() == 3);
    CHECK(std::holds_alternative<InvMsg>(*std::get<2>(net.sent[0])));
    CHECK(std::holds_alternative<GetDataMsg>(*std::get<2>(net.sent[1])));
    CHECK(std::holds_alternative<TxMsg>(*std::get<2>(net.sent[2])));
    // seen inventory suppresses the echo back to the announcer
    CHECK(net.nodes.at(2).PeerKnowsTx(1, tx->id));
}

TEST_CASE("orphan parents are fetched from the sender")
{
    Net net;
    net.Add(1);
    net.Add(2);
    net.Connect(1, 2);
    TxRef parent = MakeTx(TaggedId(1), 10, 500);
    TxRef child = MakeTx(TaggedId(2), 10, 500, {parent->id});
    net.nodes.at(1).SubmitTransaction(parent, 0);
    net.nodes.at(1).SubmitTransaction(child, 0);
    HandleResult r = net.nodes.at(2).HandleMessage(1, TxMsg{child}, 0);
    auto req = OfKind<GetDataMsg>(r);
    REQUIRE(req.size() == 1);
    CHECK(req[0].first == 1);
    CHECK(req[0].second->ids == std::vector<TxId>{parent->id});
    net.Take(2, std::move(r));
    net.Pump();
    CHECK(net.nodes.at(2).GetMempool().Contains(child->id));
    CHECK(net.nodes.at(2).GetMempool().Contains(parent->id));
}

TEST_CASE("compact block with a full mempool")
{
    Net net;
    Node& a = net.Add(1);
    Node& b = net.Add(2);
    net.Add(3);
    net.Connect(1, 2);
    net.Connect(2, 3);
    Rng rng(2);
    std::vector<TxRef> txs = RandomTxs(rng, 40);
    for (const TxRef& tx : txs) b.SubmitTransaction(tx, 0);
    FullBlockRef blk = MineOn(a, txs);
    a.SubmitBlock(blk, 0);
    CompactBlock cb = MakeCompactBlock(*blk, 77);

    HandleResult r = b.HandleMessage(1, CmpctBlockMsg{std::make_shared<const CompactBlock>(cb)}, 0);
    CHECK(OfKind<GetBlockTxnMsg>(r).empty());
    CHECK(r.accepted_blocks == std::vector<BlockId>{blk->block.id});
    auto relayed = OfKind<CmpctBlockMsg>(r);
    REQUIRE(relayed.size() == 1);
    CHECK(relayed[0].first == 3);
    REQUIRE(r.observations.size() == 1);
    CHECK(r.observations[0].success);
    CHECK(r.observations[0].round_trips == 0);
    CHECK(b.Tip() == blk->block.id);
    CHECK(b.GetMempool().Size() == 0);
}

TEST_CASE("compact block with one missing transaction")
{
    Net net;
    Node& a = net.Add(1);
    Node& b = net.Add(2);
    net.Connect(1, 2);
    Rng rng(3);
    std::vector<TxRef> txs = RandomTxs(rng, 40);
    FullBlockRef blk = MineOn(a, txs);
    for (size_t i = 0; i < blk->txs.size(); ++i) {
        if (i != 7) b.SubmitTransaction(blk->txs[i], 0);
    }
    a.SubmitBlock(blk, 0);
    CompactBlock cb = MakeCompactBlock(*blk, 5);
    HandleResult r = b.HandleMessage(1, CmpctBlockMsg{std::make_shared<const CompactBlock>(cb)}, 0);
    auto reqs = OfKind<GetBlockTxnMsg>(r);
    REQUIRE(reqs.size() == 1);
    CHECK(r.out.size() == 1);
    CHECK(reqs[0].first == 1);
    CHECK(reqs[0].second->indexes == std::vector<uint32_t>{7});
    CHECK(b.PendingCount() == 1);

    net.Take(2, std::move(r));
    net.Pump();
    CHECK(b.KnowsBlock(blk->block.id));
    CHECK(b.PendingCount() == 0);
    REQUIRE(net.observations.size() == 1);
    const BlockObservation& obs = net.observations[0];
    CHECK_FALSE(obs.success);
    CHECK(obs.missing == 1);
    CHECK(obs.round_trips == 1);
    CHECK(obs.requested_indexes == std::vector<uint32_t>{7});
}

TEST_CASE("mempool sync sends the top of the pool to every peer")
{
    Node n(1, RelayConfig{});
    for (NodeId p : {2, 3, 4}) n.AddPeer(p, p == 2);
    Rng rng(4);
    for (const TxRef& tx : RandomTxs(rng, 5000)) n.SubmitTransaction(tx, 0);
    HandleResult r = n.HandleMessage(SELF_PEER, TxMempoolSyncMsg{}, 0);
    auto invs = OfKind<InvMsg>(r);
    REQUIRE(invs.size() == 3);
    std::set<NodeId> to;
    for (auto& [peer, inv] : invs) {
        to.insert(peer);
        CHECK(inv->sync);
        CHECK(inv->ids == n.GetMempool().TopRanked(1000));
    }
    CHECK(to == std::set<NodeId>{2, 3, 4});
    CHECK(r.sync_fired);
    CHECK(r.sync_inventory == 1000);

    RelayConfig outbound_only;
    outbound_only.sync_outbound_only = true;
    Node m(1, outbound_only);
    for (NodeId p : {2, 3, 4}) m.AddPeer(p, p == 2);
    m.SubmitTransaction(RandomTx(rng), 0);
    auto only = OfKind<InvMsg>(m.HandleMessage(SELF_PEER, TxMempoolSyncMsg{}, 0));
    REQUIRE(only.size() == 1);
    CHECK(only[0].first == 2);
}

TEST_CASE("the pseudo-timer runs a sync before the interrupting message")
{
    Node n(1, RelayConfig{});
    n.AddPeer(2, true);
    Rng rng(5);
    n.SubmitTransaction(RandomTx(rng), 0);
    n.Trigger() = SyncTrigger{.enabled = true, .limit = 3, .counter = 0};
    TxRef incoming = RandomTx(rng);
    CHECK_FALSE(n.Receive(2, InvMsg{{RandomId(rng)}}, 0).sync_fired);
    CHECK_FALSE(n.Receive(2, InvMsg{{RandomId(rng)}}, 0).sync_fired);
    HandleResult r = n.Receive(2, InvMsg{{incoming->id}}, 0);
    CHECK(r.sync_fired);
    REQUIRE(r.out.size() == 2);
    CHECK(std::get<InvMsg>(*r.out[0].msg).sync);
    CHECK(std::holds_alternative<GetDataMsg>(*r.out[1].msg));
    CHECK(n.Trigger().counter == 0);
}

TEST_CASE("property: one sync round over a lossless link delivers the selection")
{
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        Net net;
        Node& a = net.Add(1);
        Node& b = net.Add(2);
        net.Connect(1, 2);
        Rng rng(seed);
        std::vector<TxRef> txs;
        for (int i = 0; i < 3000; ++i) {
            std::vector<TxId> parents;
            if (!txs.empty() && rng.Bernoulli(0.1)) parents.push_back(txs[rng.UniformInt(0, txs.size() - 1)]->id);
            txs.push_back(MakeTx(RandomId(rng), rng.UniformInt(1, 1000), rng.UniformInt(500, 800), parents));
        }
        for (const TxRef& tx : txs) a.SubmitTransaction(tx, 0);
        // B starts from a consistent pool: whatever it holds, it holds the parents of
        for (const TxRef& tx : txs) {
            bool parents_held = std::all_of(tx->parents.begin(), tx->parents.end(),
                                            [&](const TxId& p) { return b.GetMempool().Contains(p); });
            if (parents_held && rng.Bernoulli(0.5)) b.SubmitTransaction(tx, 0);
        }
        CHECK(b.GetMempool().OrphanCount() == 0);
        std::vector<TxId> selected = FalafelSelect(a.GetMempool());
        net.Take(1, a.HandleMessage(SELF_PEER, TxMempoolSyncMsg{}, 0));
        net.Pump();
        for (const TxId& id : selected) CHECK(b.GetMempool().Contains(id));
        CHECK(net.conservation_violations == 0);
    }
}

TEST_CASE("legacy relay")
{
    RelayConfig cfg;
    cfg.mode = RelayMode::LEGACY;
    Net net;
    Node& a = net.Add(1, cfg);
    Node& b = net.Add(2, cfg);
    net.Connect(1, 2);
    Rng rng(6);
    FullBlockRef blk = MineOn(a, RandomTxs(rng, 10));
    net.Take(1, a.SubmitBlock(blk, 0));
    net.Pump();
    CHECK(b.KnowsBlock(blk->block.id));
    REQUIRE(net.observations.size() == 1);
    CHECK(net.observations[0].success);
    CHECK(net.observations[0].protocol == RelayMode::LEGACY);
}

TEST_CASE("graphene relay")
{
    for (GrapheneModel model : {GrapheneModel::THRESHOLD, GrapheneModel::IBLT}) {
        CAPTURE(GrapheneModelName(model));
        RelayConfig cfg;
        cfg.mode = RelayMode::GRAPHENE;
        cfg.graphene_model = model;
        Rng rng(7);
        std::vector<TxRef> txs = RandomTxs(rng, 200);

        SUBCASE("full mempool")
        {
            Net net;
            Node& a = net.Add(1, cfg);
            Node& b = net.Add(2, cfg);
            net.Connect(1, 2);
            for (const TxRef& tx : txs) b.SubmitTransaction(tx, 0);
            FullBlockRef blk = MineOn(a, txs);
            net.Take(1, a.SubmitBlock(blk, 0));
            net.Pump();
            CHECK(b.KnowsBlock(blk->block.id));
            REQUIRE(net.observations.size() == 1);
            CHECK(net.observations[0].success);
            CHECK(net.observations[0].round_trips == 0);
        }
        SUBCASE("a few missing")
        {
            Net net;
            Node& a = net.Add(1, cfg);
            Node& b = net.Add(2, cfg);
            net.Connect(1, 2);
            FullBlockRef blk = MineOn(a, txs);
            for (size_t i = 3; i < blk->txs.size(); ++i) b.SubmitTransaction(blk->txs[i], 0);
            net.Take(1, a.SubmitBlock(blk, 0));
            net.Pump();
            CHECK(b.KnowsBlock(blk->block.id));
            REQUIRE(net.observations.size() == 1);
            CHECK(net.observations[0].success);
            CHECK(net.observations[0].missing == 3);
            CHECK(net.observations[0].requested_ids.size() == 3);
        }
        SUBCASE("too many missing needs a larger sketch")
        {
            Net net;
            Node& a = net.Add(1, cfg);
            Node& b = net.Add(2, cfg);
            net.Connect(1, 2);
            FullBlockRef blk = MineOn(a, txs);
            for (size_t i = 60; i < blk->txs.size(); ++i) b.SubmitTransaction(blk->txs[i], 0);
            net.Take(1, a.SubmitBlock(blk, 0));
            net.Pump();
            CHECK(b.KnowsBlock(blk->block.id));
            REQUIRE(net.observations.size() == 1);
            const BlockObservation& obs = net.observations[0];
            CHECK_FALSE(obs.success);
            CHECK(obs.decode_failures >= 1);
            CHECK(obs.round_trips == obs.decode_failures);
            size_t larger = 0;
            for (auto& [from, to, msg] : net.sent) larger += std::holds_alternative<GetGrapheneLargerMsg>(*msg);
            CHECK(larger == obs.decode_failures);
        }
    }
}

TEST_CASE("disconnect abandons pending reconstructions")
{
    Node b(2, RelayConfig{});
    b.AddPeer(1, true);
    Node a(1, RelayConfig{});
    Rng rng(8);
    FullBlockRef blk = MineOn(a, RandomTxs(rng, 20));
    CompactBlock cb = MakeCompactBlock(*blk, 1);
    b.HandleMessage(1, CmpctBlockMsg{std::make_shared<const CompactBlock>(cb)}, 0);
    CHECK(b.PendingCount() == 1);
    auto lost = b.Disconnect(10);
    CHECK(b.PendingCount() == 0);
    CHECK(b.InFlightTxRequests() == 0);
    REQUIRE(lost.size() == 1);
    CHECK(lost[0].abandoned);
    CHECK_FALSE(lost[0].success);
    // a late reply is ignored
    HandleResult late = b.HandleMessage(1, BlockTxnMsg{blk->block.id, ServeBlockTxn(*blk, {1})}, 20);
    CHECK(late.observations.empty());
    CHECK_FALSE(b.KnowsBlock(blk->block.id));
}

TEST_CASE("tampered block is rejected")
{
    Node b(2, RelayConfig{});
    b.AddPeer(1, true);
    Rng rng(9);
    std::vector<TxRef> txs = RandomTxs(rng, 5);
    FullBlockRef good = MakeBlockOf(txs);
    Block bad = good->block;
    bad.txs.pop_back();
    HandleResult r = b.HandleMessage(1, BlockMsg{MakeFullBlock(bad, {txs.begin(), txs.end() - 1})}, 0);
    CHECK(r.accepted_blocks.empty());
    REQUIRE(r.notes.size() == 1);
    CHECK(r.notes[0].kind == "bad_block");
}

TEST_CASE("trickled inventory waits for a flush")
{
    RelayConfig cfg;
    cfg.trickle_inventory = true;
    Node n(1, cfg);
    n.AddPeer(2, true);
    Rng rng(10);
    TxRef tx = RandomTx(rng);
    CHECK(n.SubmitTransaction(tx, 0).out.empty());
    HandleResult r = n.FlushInventory(5);
    REQUIRE(r.out.size() == 1);
    CHECK(std::get<InvMsg>(*r.out[0].msg).ids == std::vector<TxId>{tx->id});
    CHECK(n.FlushInventory(6).out.empty());
}

TEST_CASE("relay mode names round-trip")
{
    for (RelayMode m : {RelayMode::LEGACY, RelayMode::COMPACT, RelayMode::GRAPHENE}) {
        CHECK(ParseRelayMode(RelayModeName(m)) == m);
    }
    for (GrapheneModel m : {GrapheneModel::THRESHOLD, GrapheneModel::IBLT}) {
        CHECK(ParseGrapheneModel(GrapheneModelName(m)) == m);
    }
    CHECK_FALSE(ParseRelayMode("xthin"));
}
