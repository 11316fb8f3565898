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

#pragma once

// 5G system as a DetNet transit node: slot-level worst/best-case latency of
// the TDD air interface and the delay contract the AF reports to the CNM.

#include "detnet5g/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace detnet5g {

enum class Direction { Uplink, Downlink };

std::string_view to_string(Direction d);

struct TddConfig {
    std::string pattern = "DDDSU";
    int numerology = 1;
    int grant_delay_slots = 0;
    // 'S' and 'F' slots follow these two flags.
    bool s_slot_usable_ul = false;
    bool s_slot_usable_dl = true;

    // Throws InvalidTdd on an empty pattern, unknown slot letters, a
    // negative grant delay or numerology outside 0..4.
    void validate() const;

    std::size_t period_slots() const { return pattern.size(); }
    // 1 ms / 2^mu; 62.5 us for mu = 4, hence nanoseconds.
    Nanos slot_duration() const;
    Nanos period() const { return slot_duration() * static_cast<std::int64_t>(pattern.size()); }
    bool usable(std::size_t slot_index, Direction d) const;
    std::size_t usable_count(Direction d) const;

    bool operator==(const TddConfig&) const = default;
};

struct UeRecord {
    std::string id;
    Bytes tbs_ul_B = 0;
    Bytes tbs_dl_B = 0;
    int mcs_index = 0;

    Bytes tbs(Direction d) const { return d == Direction::Uplink ? tbs_ul_B : tbs_dl_B; }

    bool operator==(const UeRecord&) const = default;
};

struct TransitNode5G {
    NodeId id = "5GS";
    TddConfig tdd;
    std::map<std::string, UeRecord> ues;
    // Switch port the NW-TT egress is cabled to.
    PortId attach;

    bool operator==(const TransitNode5G&) const = default;
};

// Latency of a burst needing `grants` slot grants that arrives just after the
// start of slot `arrival_slot`. nullopt if the direction has no usable slot.
std::optional<Nanos> burst_latency_from_slot(const TddConfig& tdd, Direction d,
                                             std::size_t arrival_slot, std::int64_t grants);

// Worst case, over every arrival slot of one period, of a single burst that
// needs ceil(burst_B / tbs) grants. Throws NoUplinkSlots / NoDownlinkSlots
// and RateExceedsCapacity.
Nanos worst_case_latency_ns(const TddConfig& tdd, Direction d, Bytes tbs, Bytes burst_B,
                            BytesPerSec rate_Bps);
Micros worst_case_ul_latency(const TddConfig& tdd, const UeRecord& ue, Bytes burst_B,
                             BytesPerSec rate_Bps);
Micros worst_case_dl_latency(const TddConfig& tdd, const UeRecord& ue, Bytes burst_B,
                             BytesPerSec rate_Bps);

// Smallest latency any packet can see: it arrives right before the end of a
// slot and is served in the first eligible usable slot.
Nanos best_case_latency_ns(const TddConfig& tdd, Direction d);

// Delay bound for a (burst, rate) token-bucket flow offered to the slot
// server. Accounts for sustained arrivals spilling into later grants, so it
// is never below worst_case_latency_ns for the same burst.
Nanos sustained_latency_bound_ns(const TddConfig& tdd, Direction d, Bytes tbs, Bytes burst_B,
                                 BytesPerSec rate_Bps);

// Bytes per second deliverable to one UE: usable slots x tbs / period.
double capacity(const TddConfig& tdd, Direction d, Bytes tbs);
double ul_capacity(const TddConfig& tdd, const UeRecord& ue);
double dl_capacity(const TddConfig& tdd, const UeRecord& ue);
// Exact integer comparison rate <= capacity.
bool rate_within_capacity(const TddConfig& tdd, Direction d, Bytes tbs, BytesPerSec rate_Bps);

struct TransitContract {
    Micros delay_bound{0};
    Micros best_case{0};
    Micros jitter{0};

    bool operator==(const TransitContract&) const = default;
};

// What the AF reports to the CNM for one UE and one (aggregate) token
// bucket. Throws UnknownUe.
TransitContract transit_contract(const TransitNode5G& node, const std::string& ue_id,
                                 Direction d, Bytes burst_B, BytesPerSec rate_Bps);

} // namespace detnet5g
