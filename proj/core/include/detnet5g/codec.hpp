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

// JSON wire formats. Every document carries "schema_version": 1.

#include "detnet5g/admission.hpp"
#include "detnet5g/nwtt.hpp"
#include "detnet5g/topology.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace detnet5g::codec {

inline constexpr int kSchemaVersion = 1;

using nlohmann::json;

// Parses text, turning syntax errors into ParseError with line and column.
json parse_text(std::string_view text, const std::string& origin);

// Field readers with path-qualified diagnostics. They throw `code`.
class Reader {
public:
    Reader(const json& j, std::string path, ErrorCode code = ErrorCode::ParseError);

    bool has(const char* key) const;
    std::string str(const char* key) const;
    std::int64_t integer(const char* key) const;
    std::int64_t integer_or(const char* key, std::int64_t fallback) const;
    bool boolean_or(const char* key, bool fallback) const;
    std::string str_or(const char* key, std::string fallback) const;
    Reader object(const char* key) const;
    // Elements of an array member, or nothing if the member is absent.
    std::vector<Reader> array(const char* key, bool required = true) const;
    [[noreturn]] void fail(const std::string& what) const;
    void fail_at(const char* key, const std::string& what) const;

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }

private:
    const json& member(const char* key) const;

    const json* j_;
    std::string path_;
    ErrorCode code_;
};

// Rejects documents whose schema_version is present and not 1.
void check_schema_version(const Reader& r);

Topology topology_from_json(const Reader& r);
json topology_to_json(const Topology& topo);

UeRecord ue_from_json(const Reader& r);
json to_json(const UeRecord& ue);

FlowSpec flow_spec_from_json(const Reader& r);
json to_json(const FlowSpec& spec);

// Flow request of the CNM wire schema. Throws MalformedRequest.
FlowSpec parse_flow_request(std::string_view text);

json to_json(const VlanTree& tree);
json to_json(const FlowAssignment& a);
json decision_to_json(const Decision& d);
json to_json(const RegulatorConfig& cfg);
json to_json(const NwttConfig& cfg);
json to_json(const HostConfig& cfg);

} // namespace detnet5g::codec
