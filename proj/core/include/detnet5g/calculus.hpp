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

// Deterministic network calculus for one non-preemptive strict-priority
// egress port: token-bucket arrivals, rate-latency residual service and the
// resulting per-class delay and backlog bounds.
//
// All delays are whole microseconds rounded up; sizes whole bytes.

#include "detnet5g/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace detnet5g {

struct TokenBucket {
    Bytes burst_B = 0;
    BytesPerSec rate_Bps = 0;

    bool operator==(const TokenBucket&) const = default;
};

struct RateLatency {
    BytesPerSec rate_Bps = 0;
    Micros latency{0};

    bool operator==(const RateLatency&) const = default;
};

struct ClassAggregate {
    Bytes burst_B = 0;
    BytesPerSec rate_Bps = 0;
    Bytes max_pkt_B = 0;
    std::vector<std::string> flows;

    bool operator==(const ClassAggregate&) const = default;
};

// Egress port view: class index = priority, higher index wins.
struct PortClassState {
    BytesPerSec link_rate_Bps = 0;
    Bytes buffer_B = 0;
    // Blocking floor: unannounced best-effort packets can be this large.
    Bytes l_max_floor_B = 1500;
    std::vector<ClassAggregate> classes;
    std::vector<Micros> fwd_delay;

    explicit PortClassState(int class_count = 8) : classes(class_count), fwd_delay(class_count) {}

    int class_count() const { return static_cast<int>(classes.size()); }
    // Largest packet that can block class `cls` (classes <= cls, floored).
    Bytes l_max(int cls) const;
    Bytes higher_burst(int cls) const;
    BytesPerSec higher_rate(int cls) const;
    BytesPerSec total_rate() const;

    bool operator==(const PortClassState&) const = default;
};

// R = C - r_H, T = (b_H + l_max) / R. Throws Unschedulable if r_H >= C.
RateLatency sp_residual_service(const PortClassState& state, int cls);

// T + b_p / R + per-class forwarding delay. Throws Unschedulable or
// RateOverload (r_p > R).
Micros hop_delay_bound(const PortClassState& state, int cls);

// b_p + r_p * T. Throws Unschedulable.
Bytes backlog_bound(const PortClassState& state, int cls);

// Output burst after a hop with delay bound D: b + r * D, rate unchanged.
TokenBucket propagate_burst(TokenBucket tb, Micros hop_delay);

// Sum of the path-ordered per-hop bounds plus transit and regulator delay.
Micros e2e_delay(std::span<const Micros> per_hop, Micros transit_delay, Micros regulator_delay);

} // namespace detnet5g
