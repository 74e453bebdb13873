// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/netsim.h>

#include <cmath>
#include <stdexcept>

namespace churnsim {

namespace {

SimTime Offset(const ChurnSchedule& s, SimTime t)
{
    SimTime r = (t + s.phase) % s.period;
    return r < 0 ? r + s.period : r;
}

/** First offset at which the node is offline. */
SimTime UpLength(const ChurnSchedule& s)
{
    return SimTime(std::ceil(s.up_fraction * double(s.period)));
}

} // namespace

void ValidateChurn(const ChurnSchedule& schedule)
{
    if (schedule.period <= 0) throw std::invalid_argument("churn period must be positive");
    if (!(schedule.up_fraction > 0.0 && schedule.up_fraction <= 1.0)) {
        throw std::invalid_argument("churn up_fraction must be in (0, 1]");
    }
}

bool ChurnOnline(const ChurnSchedule& schedule, SimTime t)
{
    return double(Offset(schedule, t)) < schedule.up_fraction * double(schedule.period);
}

SimTime ChurnNextTransition(const ChurnSchedule& schedule, SimTime t)
{
    const SimTime up = UpLength(schedule);
    if (up >= schedule.period) return std::numeric_limits<SimTime>::max();
    const SimTime r = Offset(schedule, t);
    return r < up ? t + (up - r) : t + (schedule.period - r);
}

SimTime ScaledMillis(double seconds, double time_scale)
{
    return SimTime(std::llround(seconds * 1000.0 / time_scale));
}

} // namespace churnsim
