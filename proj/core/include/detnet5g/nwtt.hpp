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

// Network-side translator at the 5G egress: per-flow classification and
// tagging, the hold-and-forward de-jitter buffer, and the token-bucket
// shaper that re-polices 5G flows before they enter the fabric.

#include "detnet5g/common.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace detnet5g {

enum class MatchMode { PerFlow, PerClass };

struct RegulatorConfig {
    Micros hold{0};
    Micros release_period{1};
    std::size_t queue_cap_pkts = 64;
    MatchMode mode = MatchMode::PerFlow;

    // Throws InvalidRegulator if release_period <= 0, hold < 0 or cap == 0.
    void validate() const;

    bool operator==(const RegulatorConfig&) const = default;
};

// Added delay of the regulator for a (burst, max_pkt) conforming flow whose
// packet rate does not exceed one per release period.
Micros regulator_delay_bound(const RegulatorConfig& cfg, Bytes burst_B, Bytes max_pkt_B);

// Five-tuple stand-in: UE source, destination and the flow's own id.
struct FlowMatch {
    std::string src;
    NodeId dst;
    std::string flow_id;

    auto operator<=>(const FlowMatch&) const = default;
};

struct NwttRule {
    FlowMatch match;
    PortId egress;
    int vlan_id = 0;
    int pcp = 0;
    std::optional<RegulatorConfig> regulator;

    bool operator==(const NwttRule&) const = default;
};

struct NwttConfig {
    std::map<FlowMatch, NwttRule> rules;

    // Throws DuplicateRule if a rule for the same match already exists.
    void add(const NwttRule& rule);
    const NwttRule* find(const FlowMatch& m) const;

    bool operator==(const NwttConfig&) const = default;
};

struct PacketMeta {
    std::string src;
    NodeId dst;
    std::string flow_id;
};

struct Tagged {
    PortId egress;
    int vlan_id = 0;
    int pcp = 0;
    const NwttRule* rule = nullptr;
};

struct BestEffort {
    static constexpr int pcp = 0;
};

using Classification = std::variant<Tagged, BestEffort>;

Classification classify_and_tag(const NwttConfig& cfg, const PacketMeta& pkt);

// Hold-and-forward buffer for one queue. Packets are opaque handles.
//
// The first packet of a busy period is held for `hold`; afterwards one packet
// leaves every `release_period`. A busy period ends when a scheduled release
// instant finds the queue empty; the next arrival re-anchors.
class Regulator {
public:
    using Handle = std::uint64_t;

    enum class Offer { Enqueued, Dropped };

    struct Departure {
        Handle packet;
        Nanos depart;
        Nanos arrival;
    };

    explicit Regulator(RegulatorConfig cfg);

    // Call release(t) first so expired schedules are settled.
    Offer offer(Handle packet, Nanos t_arrival);
    std::vector<Departure> release(Nanos t_now);

    bool idle() const { return !active_; }
    std::optional<Nanos> next_release() const;
    std::size_t queued() const { return queue_.size(); }
    const RegulatorConfig& config() const { return cfg_; }

    std::uint64_t offered() const { return offered_; }
    std::uint64_t released() const { return released_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    RegulatorConfig cfg_;
    std::deque<std::pair<Handle, Nanos>> queue_;
    bool active_ = false;
    Nanos anchor_{0};
    Nanos next_release_{0};
    Nanos last_arrival_{0};
    std::uint64_t offered_ = 0;
    std::uint64_t released_ = 0;
    std::uint64_t dropped_ = 0;
};

// Greedy packet-level (b, r) shaper. Tokens are kept in byte-nanoseconds
// per second so no rounding accumulates.
class TokenBucketShaper {
public:
    TokenBucketShaper(Bytes burst_B, BytesPerSec rate_Bps);

    // Earliest departure of a packet of `size_B` that reaches the shaper at
    // `t` behind all previously shaped packets; consumes the tokens.
    Nanos shape(Bytes size_B, Nanos t);

private:
    std::int64_t capacity_;  // burst in byte * 1e9
    BytesPerSec rate_;
    std::int64_t tokens_;
    Nanos last_{0};
    Nanos last_departure_{0};
};

} // namespace detnet5g
