/*
 * Copyright 2026 The detnet5g Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "detnet5g/calculus.hpp"

#include <algorithm>
#include <numeric>

namespace detnet5g {

Bytes PortClassState::l_max(int cls) const
{
    Bytes m = l_max_floor_B;
    for (int c = 0; c <= cls && c < class_count(); ++c)
        m = std::max(m, classes[static_cast<std::size_t>(c)].max_pkt_B);
    return m;
}

Bytes PortClassState::higher_burst(int cls) const
{
    Bytes b = 0;
    for (int c = cls + 1; c < class_count(); ++c)
        b += classes[static_cast<std::size_t>(c)].burst_B;
    return b;
}

BytesPerSec PortClassState::higher_rate(int cls) const
{
    BytesPerSec r = 0;
    for (int c = cls + 1; c < class_count(); ++c)
        r += classes[static_cast<std::size_t>(c)].rate_Bps;
    return r;
}

BytesPerSec PortClassState::total_rate() const
{
    return std::accumulate(classes.begin(), classes.end(), BytesPerSec{0},
                           [](BytesPerSec acc, const ClassAggregate& a) { return acc + a.rate_Bps; });
}

RateLatency sp_residual_service(const PortClassState& state, int cls)
{
    const BytesPerSec residual = state.link_rate_Bps - state.higher_rate(cls);
    if (residual <= 0)
        throw Error(ErrorCode::Unschedulable,
                    "higher classes consume the whole link at class " + std::to_string(cls));
    const Bytes blocking = state.higher_burst(cls) + state.l_max(cls);
    return RateLatency{residual, transmission_time_us(blocking, residual)};
}

Micros hop_delay_bound(const PortClassState& state, int cls)
{
    const auto service = sp_residual_service(state, cls);
    const auto& own = state.classes.at(static_cast<std::size_t>(cls));
    if (own.rate_Bps > service.rate_Bps)
        throw Error(ErrorCode::RateOverload,
                    "class " + std::to_string(cls) + " rate exceeds its residual service");
    const Micros fwd = static_cast<std::size_t>(cls) < state.fwd_delay.size()
                           ? state.fwd_delay[static_cast<std::size_t>(cls)]
                           : Micros{0};
    return service.latency + transmission_time_us(own.burst_B, service.rate_Bps) + fwd;
}

Bytes backlog_bound(const PortClassState& state, int cls)
{
    const auto service = sp_residual_service(state, cls);
    const auto& own = state.classes.at(static_cast<std::size_t>(cls));
    return own.burst_B + ceil_div(own.rate_Bps * service.latency.count(), 1'000'000);
}

TokenBucket propagate_burst(TokenBucket tb, Micros hop_delay)
{
    tb.burst_B += ceil_div(tb.rate_Bps * hop_delay.count(), 1'000'000);
    return tb;
}

Micros e2e_delay(std::span<const Micros> per_hop, Micros transit_delay, Micros regulator_delay)
{
    return std::accumulate(per_hop.begin(), per_hop.end(), transit_delay + regulator_delay);
}

} // namespace detnet5g
