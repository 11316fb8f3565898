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

#include "detnet5g/nwtt.hpp"

#include <algorithm>

namespace detnet5g {

void RegulatorConfig::validate() const
{
    if (release_period <= Micros{0})
        throw Error(ErrorCode::InvalidRegulator, "release period must be positive");
    if (hold < Micros{0})
        throw Error(ErrorCode::InvalidRegulator, "hold time must be >= 0");
    if (queue_cap_pkts == 0)
        throw Error(ErrorCode::InvalidRegulator, "queue capacity must be >= 1");
}

Micros regulator_delay_bound(const RegulatorConfig& cfg, Bytes burst_B, Bytes max_pkt_B)
{
    const auto packets = std::max<std::int64_t>(1, ceil_div(burst_B, max_pkt_B));
    return cfg.hold + (packets - 1) * cfg.release_period;
}

void NwttConfig::add(const NwttRule& rule)
{
    if (!rules.emplace(rule.match, rule).second)
        throw Error(ErrorCode::DuplicateRule, "rule for flow '" + rule.match.flow_id + "' exists");
}

const NwttRule* NwttConfig::find(const FlowMatch& m) const
{
    auto it = rules.find(m);
    return it == rules.end() ? nullptr : &it->second;
}

Classification classify_and_tag(const NwttConfig& cfg, const PacketMeta& pkt)
{
    const NwttRule* rule = cfg.find(FlowMatch{pkt.src, pkt.dst, pkt.flow_id});
    if (rule == nullptr)
        return BestEffort{};
    return Tagged{rule->egress, rule->vlan_id, rule->pcp, rule};
}

Regulator::Regulator(RegulatorConfig cfg) : cfg_(cfg)
{
    cfg_.validate();
}

Regulator::Offer Regulator::offer(Handle packet, Nanos t_arrival)
{
    ++offered_;
    last_arrival_ = std::max(last_arrival_, t_arrival);
    if (!active_) {
        active_ = true;
        anchor_ = t_arrival;
        next_release_ = t_arrival + cfg_.hold;
    }
    if (queue_.size() >= cfg_.queue_cap_pkts) {
        ++dropped_;
        return Offer::Dropped;
    }
    queue_.emplace_back(packet, t_arrival);
    return Offer::Enqueued;
}

std::vector<Regulator::Departure> Regulator::release(Nanos t_now)
{
    std::vector<Departure> out;
    while (active_ && next_release_ <= t_now) {
        if (queue_.empty()) {
            // A release instant with nothing to send closes the busy period.
            active_ = false;
            break;
        }
        auto [h, arrival] = queue_.front();
        queue_.pop_front();
        out.push_back(Departure{h, next_release_, arrival});
        ++released_;
        next_release_ += cfg_.release_period;
    }
    return out;
}

std::optional<Nanos> Regulator::next_release() const
{
    if (!active_)
        return std::nullopt;
    return next_release_;
}

TokenBucketShaper::TokenBucketShaper(Bytes burst_B, BytesPerSec rate_Bps)
    : capacity_(burst_B * 1'000'000'000), rate_(rate_Bps), tokens_(capacity_)
{
    if (burst_B <= 0 || rate_Bps <= 0)
        throw Error(ErrorCode::InvalidRegulator, "shaper needs positive burst and rate");
}

Nanos TokenBucketShaper::shape(Bytes size_B, Nanos t)
{
    using Wide = __int128;
    t = std::max(t, last_departure_);
    const Wide refill = static_cast<Wide>(rate_) * (t - last_).count();
    tokens_ = static_cast<std::int64_t>(std::min<Wide>(capacity_, tokens_ + refill));
    last_ = t;

    const std::int64_t need = std::min<std::int64_t>(size_B * 1'000'000'000, capacity_);
    Nanos depart = t;
    if (tokens_ < need) {
        const Nanos wait{ceil_div(need - tokens_, rate_)};
        depart = t + wait;
        tokens_ = static_cast<std::int64_t>(
            std::min<Wide>(capacity_, tokens_ + static_cast<Wide>(rate_) * wait.count()));
        last_ = depart;
    }
    tokens_ -= need;
    last_departure_ = depart;
    return depart;
}

} // namespace detnet5g
