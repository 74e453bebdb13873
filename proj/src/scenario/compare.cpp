// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/scenario.h>

#include <cstdio>
#include <fstream>
#include <ostream>

namespace churnsim {

namespace {

SummaryTable ReadSummaryFile(const std::filesystem::path& dir)
{
    const auto path = dir / "summary.csv";
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    return ReadSummaryCsv(in);
}

std::string Fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

Comparison CompareSummaries(const SummaryTable& a, const SummaryTable& b)
{
    if (a.nodes.size() != b.nodes.size()) throw SchemaError("summaries list different numbers of nodes");
    Comparison cmp;
    cmp.scenario_a = a.scenario;
    cmp.scenario_b = b.scenario;
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i].node != b.nodes[i].node) throw SchemaError("summaries list different nodes");
        NodeDelta d;
        d.node = a.nodes[i].node;
        d.rate_a = a.nodes[i].avg_rate;
        d.rate_b = b.nodes[i].avg_rate;
        d.delta_pp = d.rate_b - d.rate_a;
        cmp.nodes.push_back(d);
    }
    cmp.gap_a = a.gap_pp;
    cmp.gap_b = b.gap_pp;
    cmp.gap_reduction_pp = a.gap_pp - b.gap_pp;
    cmp.gap_reduction_pct = a.gap_pp == 0 ? 0 : cmp.gap_reduction_pp / a.gap_pp * 100.0;
    return cmp;
}

Comparison CompareRuns(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b)
{
    return CompareSummaries(ReadSummaryFile(dir_a), ReadSummaryFile(dir_b));
}

void WriteComparisonCsv(std::ostream& os, const Comparison& cmp)
{
    os << "item,a,b,delta\n";
    for (const NodeDelta& d : cmp.nodes) {
        os << "node_" << d.node << ',' << Fixed(d.rate_a) << ',' << Fixed(d.rate_b) << ',' << Fixed(d.delta_pp) << '\n';
    }
    os << "gap_pp," << Fixed(cmp.gap_a) << ',' << Fixed(cmp.gap_b) << ',' << Fixed(-cmp.gap_reduction_pp) << '\n';
    os << "gap_reduction_pct,,," << Fixed(cmp.gap_reduction_pct) << '\n';
}

} // namespace churnsim
