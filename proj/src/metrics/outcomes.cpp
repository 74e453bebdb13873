// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/metrics.h>

#include <algorithm>
#include <cmath>

namespace churnsim {

std::vector<double> MovingSuccessRate(const std::vector<bool>& success, size_t window, bool centered)
{
    if (window == 0) throw std::invalid_argument("window must be positive");
    const size_t n = success.size();
    std::vector<uint64_t> prefix(n + 1, 0);
    for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (success[i] ? 1 : 0);

    std::vector<double> rates(n);
    for (size_t i = 0; i < n; ++i) {
        size_t lo, hi; // [lo, hi)
        if (centered) {
            lo = i >= window / 2 ? i - window / 2 : 0;
            hi = std::min(n, i + (window - 1) / 2 + 1);
        } else {
            lo = i + 1 >= window ? i + 1 - window : 0;
            hi = i + 1;
        }
        rates[i] = double(prefix[hi] - prefix[lo]) / double(hi - lo);
    }
    return rates;
}

std::vector<double> MovingSuccessRate(const std::vector<BlockOutcome>& outcomes, size_t window, bool centered)
{
    std::vector<bool> success;
    success.reserve(outcomes.size());
    for (const BlockOutcome& o : outcomes) success.push_back(o.success);
    return MovingSuccessRate(success, window, centered);
}

namespace {

NodeSummary SummarizeNode(const std::vector<BlockOutcome>& outcomes, size_t first_n)
{
    if (outcomes.empty()) throw InsufficientData("node observed no blocks");
    NodeSummary s;
    s.node = outcomes.front().node;
    s.blocks = std::min(outcomes.size(), first_n);
    for (size_t i = 0; i < s.blocks; ++i) s.successes += outcomes[i].success ? 1 : 0;
    s.avg_rate = double(s.successes) / double(s.blocks);
    return s;
}

} // namespace

RunSummary Summarize(const std::vector<BlockOutcome>& a, const std::vector<BlockOutcome>& b, size_t first_n)
{
    if (first_n == 0) throw std::invalid_argument("first_n must be positive");
    RunSummary r;
    r.a = SummarizeNode(a, first_n);
    r.b = SummarizeNode(b, first_n);
    r.gap_pp = std::abs(r.a.avg_rate - r.b.avg_rate) * 100.0;
    return r;
}

} // namespace churnsim
