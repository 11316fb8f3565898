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

#include "detnet5g/transit5g.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace detnet5g {

namespace {

using Wide = __int128;

constexpr std::int64_t kNanoPerSec = 1'000'000'000;

void require_slots(const TddConfig& tdd, Direction d)
{
    if (tdd.usable_count(d) == 0)
        throw Error(d == Direction::Uplink ? ErrorCode::NoUplinkSlots : ErrorCode::NoDownlinkSlots,
                    "pattern '" + tdd.pattern + "' has no usable slot");
}

void require_tbs(Bytes tbs)
{
    if (tbs <= 0)
        throw Error(ErrorCode::InvalidTdd, "transport block size must be positive");
}

std::int64_t grants_for(Bytes burst_B, Bytes tbs)
{
    return std::max<std::int64_t>(1, ceil_div(burst_B, tbs));
}

} // namespace

std::string_view to_string(Direction d)
{
    return d == Direction::Uplink ? "UL" : "DL";
}

void TddConfig::validate() const
{
    if (pattern.empty())
        throw Error(ErrorCode::InvalidTdd, "empty TDD pattern");
    for (char c : pattern) {
        if (c != 'D' && c != 'U' && c != 'S' && c != 'F')
            throw Error(ErrorCode::InvalidTdd, std::string("unknown slot kind '") + c + "'");
    }
    if (numerology < 0 || numerology > 4)
        throw Error(ErrorCode::InvalidTdd, "numerology must be 0..4");
    if (grant_delay_slots < 0)
        throw Error(ErrorCode::InvalidTdd, "grant delay must be >= 0");
}

Nanos TddConfig::slot_duration() const
{
    return Nanos{1'000'000 >> numerology};
}

bool TddConfig::usable(std::size_t slot_index, Direction d) const
{
    switch (pattern[slot_index % pattern.size()]) {
    case 'U': return d == Direction::Uplink;
    case 'D': return d == Direction::Downlink;
    case 'S':
    case 'F': return d == Direction::Uplink ? s_slot_usable_ul : s_slot_usable_dl;
    default: return false;
    }
}

std::size_t TddConfig::usable_count(Direction d) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i)
        n += usable(i, d) ? 1 : 0;
    return n;
}

std::optional<Nanos> burst_latency_from_slot(const TddConfig& tdd, Direction d,
                                             std::size_t arrival_slot, std::int64_t grants)
{
    if (tdd.usable_count(d) == 0)
        return std::nullopt;
    const auto slot = tdd.slot_duration();
    std::size_t j = arrival_slot + 1 + static_cast<std::size_t>(tdd.grant_delay_slots);
    std::int64_t used = 0;
    for (;; ++j) {
        if (tdd.usable(j, d) && ++used >= grants)
            break;
    }
    return slot * static_cast<std::int64_t>(j + 1 - arrival_slot);
}

Nanos worst_case_latency_ns(const TddConfig& tdd, Direction d, Bytes tbs, Bytes burst_B,
                            BytesPerSec rate_Bps)
{
    tdd.validate();
    require_tbs(tbs);
    require_slots(tdd, d);
    if (!rate_within_capacity(tdd, d, tbs, rate_Bps))
        throw Error(ErrorCode::RateExceedsCapacity,
                    std::to_string(rate_Bps) + " B/s exceeds the slot capacity");
    const auto grants = grants_for(burst_B, tbs);
    Nanos worst{0};
    for (std::size_t k = 0; k < tdd.period_slots(); ++k)
        worst = std::max(worst, *burst_latency_from_slot(tdd, d, k, grants));
    return worst;
}

Micros worst_case_ul_latency(const TddConfig& tdd, const UeRecord& ue, Bytes burst_B,
                             BytesPerSec rate_Bps)
{
    return ceil_us(worst_case_latency_ns(tdd, Direction::Uplink, ue.tbs_ul_B, burst_B, rate_Bps));
}

Micros worst_case_dl_latency(const TddConfig& tdd, const UeRecord& ue, Bytes burst_B,
                             BytesPerSec rate_Bps)
{
    return ceil_us(worst_case_latency_ns(tdd, Direction::Downlink, ue.tbs_dl_B, burst_B, rate_Bps));
}

Nanos best_case_latency_ns(const TddConfig& tdd, Direction d)
{
    tdd.validate();
    require_slots(tdd, d);
    const auto slot = tdd.slot_duration();
    Nanos best = Nanos::max();
    for (std::size_t k = 0; k < tdd.period_slots(); ++k) {
        // Arrival just before the end of slot k, one slot less than the
        // start-of-slot case.
        best = std::min(best, *burst_latency_from_slot(tdd, d, k, 1) - slot);
    }
    return best;
}

Nanos sustained_latency_bound_ns(const TddConfig& tdd, Direction d, Bytes tbs, Bytes burst_B,
                                 BytesPerSec rate_Bps)
{
    // Fluid token-bucket arrivals starting just after the start of slot k,
    // in units of 1e-9 byte so r * t (B/s * ns) stays integral.
    const Nanos burst_only = worst_case_latency_ns(tdd, d, tbs, burst_B, rate_Bps);

    const auto n_slots = static_cast<std::int64_t>(tdd.period_slots());
    const auto slot = tdd.slot_duration().count();
    const auto g = static_cast<std::int64_t>(tdd.grant_delay_slots);
    const Wide burst = static_cast<Wide>(burst_B) * kNanoPerSec;
    const Wide grant = static_cast<Wide>(tbs) * kNanoPerSec;
    const Wide rate = rate_Bps;

    // Horizon: long enough to drain the initial burst at the spare capacity.
    const double cap = capacity(tdd, d, tbs);
    const double per_period = cap * static_cast<double>(tdd.period().count()) / 1e9;
    double periods = std::ceil(static_cast<double>(burst_B) / per_period) + 3.0;
    if (static_cast<double>(rate_Bps) < cap)
        periods += std::ceil(static_cast<double>(burst_B) /
                             ((cap - static_cast<double>(rate_Bps)) *
                              static_cast<double>(tdd.period().count()) / 1e9));
    const auto max_slots =
        static_cast<std::int64_t>(std::min(periods, 1e6 / static_cast<double>(n_slots))) * n_slots;

    std::int64_t worst = burst_only.count();
    for (std::int64_t k = 0; k < n_slots; ++k) {
        Wide served = 0;
        for (std::int64_t j = k + 1 + g; j < k + 1 + g + max_slots; ++j) {
            if (!tdd.usable(static_cast<std::size_t>(j), d))
                continue;
            // Bytes that arrived before the start of slot j - g are eligible.
            const Wide eligible = burst + rate * static_cast<Wide>((j - g - k) * slot);
            const Wide next = std::min(served + grant, eligible);
            if (next > served) {
                Wide first_byte_arrival = 0;
                if (served >= burst && rate > 0)
                    first_byte_arrival = (served - burst) / rate;
                const Wide delay = static_cast<Wide>((j + 1 - k) * slot) - first_byte_arrival;
                worst = std::max<std::int64_t>(worst, static_cast<std::int64_t>(delay));
            }
            served = next;
            if (served == eligible)
                break;
        }
    }
    return Nanos{worst};
}

double capacity(const TddConfig& tdd, Direction d, Bytes tbs)
{
    const double per_period = static_cast<double>(tdd.usable_count(d)) * static_cast<double>(tbs);
    return per_period * 1e9 / static_cast<double>(tdd.period().count());
}

double ul_capacity(const TddConfig& tdd, const UeRecord& ue)
{
    return capacity(tdd, Direction::Uplink, ue.tbs_ul_B);
}

double dl_capacity(const TddConfig& tdd, const UeRecord& ue)
{
    return capacity(tdd, Direction::Downlink, ue.tbs_dl_B);
}

bool rate_within_capacity(const TddConfig& tdd, Direction d, Bytes tbs, BytesPerSec rate_Bps)
{
    const Wide lhs = static_cast<Wide>(rate_Bps) * tdd.period().count();
    const Wide rhs = static_cast<Wide>(tdd.usable_count(d)) * tbs * kNanoPerSec;
    return lhs <= rhs;
}

TransitContract transit_contract(const TransitNode5G& node, const std::string& ue_id, Direction d,
                                 Bytes burst_B, BytesPerSec rate_Bps)
{
    const auto it = node.ues.find(ue_id);
    if (it == node.ues.end())
        throw Error(ErrorCode::UnknownUe, "UE '" + ue_id + "' is not attached");
    const Bytes tbs = it->second.tbs(d);
    const Nanos worst = sustained_latency_bound_ns(node.tdd, d, tbs, burst_B, rate_Bps);
    const Nanos best = best_case_latency_ns(node.tdd, d);
    TransitContract c;
    c.delay_bound = ceil_us(worst);
    c.best_case = std::chrono::floor<Micros>(best);
    c.jitter = c.delay_bound - c.best_case;
    return c;
}

} // namespace detnet5g
