// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/netsim.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace churnsim {

Topology::Topology(size_t n) : m_outbound(n), m_latency(n * n, 0) {}

std::vector<NodeId> Topology::Inbound(NodeId node) const
{
    std::vector<NodeId> in;
    for (NodeId from = 0; from < Size(); ++from) {
        if (HasEdge(from, node)) in.push_back(from);
    }
    return in;
}

std::vector<NodeId> Topology::Neighbors(NodeId node) const
{
    std::vector<NodeId> out;
    for (NodeId other = 0; other < Size(); ++other) {
        if (other != node && m_latency[size_t{node} * Size() + other] > 0) out.push_back(other);
    }
    return out;
}

bool Topology::HasEdge(NodeId from, NodeId to) const
{
    const auto& out = m_outbound.at(from);
    return std::find(out.begin(), out.end(), to) != out.end();
}

std::optional<SimTime> Topology::Latency(NodeId a, NodeId b) const
{
    if (a >= Size() || b >= Size()) return std::nullopt;
    SimTime l = m_latency[size_t{a} * Size() + b];
    if (l == 0) return std::nullopt;
    return l;
}

bool Topology::AddEdge(NodeId from, NodeId to, SimTime latency)
{
    if (from >= Size() || to >= Size() || from == to) throw std::invalid_argument("bad edge endpoints");
    if (latency <= 0) throw std::invalid_argument("latency must be positive");
    if (HasEdge(from, to)) return false;
    m_outbound[from].push_back(to);
    SimTime& l = m_latency[size_t{from} * Size() + to];
    if (l == 0) {
        l = latency;
        m_latency[size_t{to} * Size() + from] = latency;
    }
    return true;
}

bool Topology::IsWeaklyConnected() const
{
    const size_t n = Size();
    if (n == 0) return true;
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    size_t components = n;
    for (size_t a = 0; a < n; ++a) {
        for (NodeId b : m_outbound[a]) {
            size_t ra = find(a), rb = find(b);
            if (ra != rb) {
                parent[ra] = rb;
                --components;
            }
        }
    }
    return components == 1;
}

size_t Topology::EdgeCount() const
{
    size_t total = 0;
    for (const auto& out : m_outbound) total += out.size();
    return total;
}

Topology BuildTopology(size_t n, size_t degree_lo, size_t degree_hi, LatencyRange latency, uint64_t seed)
{
    if (degree_lo == 0 || degree_lo > degree_hi) throw std::invalid_argument("bad out-degree range");
    if (n <= degree_hi) throw std::invalid_argument("node count must exceed the maximum out-degree");
    if (latency.lo <= 0 || latency.lo > latency.hi) throw std::invalid_argument("bad latency range");

    for (uint64_t attempt = 0; attempt < 1000; ++attempt) {
        Rng rng(DeriveSeed(seed, attempt));
        Topology topo(n);
        std::vector<NodeId> others;
        for (NodeId node = 0; node < n; ++node) {
            const size_t degree = rng.UniformInt(degree_lo, degree_hi);
            others.clear();
            for (NodeId j = 0; j < n; ++j) {
                if (j != node) others.push_back(j);
            }
            // Partial Fisher-Yates: the first `degree` slots are the targets.
            for (size_t i = 0; i < degree; ++i) {
                size_t k = rng.UniformInt(i, others.size() - 1);
                std::swap(others[i], others[k]);
                SimTime l = SimTime(rng.UniformInt(uint64_t(latency.lo), uint64_t(latency.hi)));
                topo.AddEdge(node, others[i], l);
            }
        }
        if (topo.IsWeaklyConnected()) return topo;
    }
    throw std::runtime_error("could not build a connected topology");
}

} // namespace churnsim
