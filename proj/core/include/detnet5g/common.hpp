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

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace detnet5g {

using Micros = std::chrono::microseconds;
using Nanos = std::chrono::nanoseconds;

// Sizes are whole bytes, rates whole bytes per second.
using Bytes = std::int64_t;
using BytesPerSec = std::int64_t;

enum class ErrorCode {
    // topology
    ConflictingPort,
    NoTransitNode,
    Disconnected,
    Unreachable,
    InvalidTopology,
    // calculus
    Unschedulable,
    RateOverload,
    // transit5g
    NoUplinkSlots,
    NoDownlinkSlots,
    RateExceedsCapacity,
    UnknownUe,
    InvalidTdd,
    // admission
    UnknownFlow,
    NotA5GFlow,
    NotAHostFlow,
    MalformedRequest,
    // nwtt
    InvalidRegulator,
    DuplicateRule,
    // sim / cli
    ScenarioInvalid,
    AdmissionMissing,
    ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

using NodeId = std::string;

// A port on a node; printed and parsed as "<node>.<index>".
struct PortId {
    NodeId node;
    int index = 0;

    auto operator<=>(const PortId&) const = default;

    std::string str() const;
    // Throws ParseError unless the text is "<node>.<non-negative int>".
    static PortId parse(std::string_view text);
};

// Ceiling of num/den for non-negative num and positive den.
constexpr std::int64_t ceil_div(std::int64_t num, std::int64_t den)
{
    return num <= 0 ? 0 : (num + den - 1) / den;
}

// Time to push `bytes` through a `rate` pipe, rounded up to the microsecond.
constexpr Micros transmission_time_us(Bytes bytes, BytesPerSec rate)
{
    return Micros{ceil_div(bytes * 1'000'000, rate)};
}

constexpr Nanos transmission_time_ns(Bytes bytes, BytesPerSec rate)
{
    return Nanos{ceil_div(bytes * 1'000'000'000, rate)};
}

// Rounds a nanosecond duration up to whole microseconds.
constexpr Micros ceil_us(Nanos d)
{
    return Micros{ceil_div(d.count(), 1000)};
}

} // namespace detnet5g
