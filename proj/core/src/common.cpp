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

#include "detnet5g/common.hpp"

#include <charconv>

namespace detnet5g {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ConflictingPort: return "ConflictingPort";
    case ErrorCode::NoTransitNode: return "NoTransitNode";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::Unschedulable: return "Unschedulable";
    case ErrorCode::RateOverload: return "RateOverload";
    case ErrorCode::NoUplinkSlots: return "NoUplinkSlots";
    case ErrorCode::NoDownlinkSlots: return "NoDownlinkSlots";
    case ErrorCode::RateExceedsCapacity: return "RateExceedsCapacity";
    case ErrorCode::UnknownUe: return "UnknownUe";
    case ErrorCode::InvalidTdd: return "InvalidTdd";
    case ErrorCode::UnknownFlow: return "UnknownFlow";
    case ErrorCode::NotA5GFlow: return "NotA5GFlow";
    case ErrorCode::NotAHostFlow: return "NotAHostFlow";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::InvalidRegulator: return "InvalidRegulator";
    case ErrorCode::DuplicateRule: return "DuplicateRule";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::AdmissionMissing: return "AdmissionMissing";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

std::string PortId::str() const
{
    return node + "." + std::to_string(index);
}

PortId PortId::parse(std::string_view text)
{
    const auto dot = text.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size())
        throw Error(ErrorCode::ParseError, "port '" + std::string(text) + "' is not <node>.<index>");
    int index = -1;
    const auto digits = text.substr(dot + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || index < 0)
        throw Error(ErrorCode::ParseError, "port '" + std::string(text) + "' has a bad index");
    return PortId{std::string(text.substr(0, dot)), index};
}

} // namespace detnet5g
