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

// Scenario files: topology, flows with their traffic sources, NW-TT and
// routing options, and simulation settings.

#include "detnet5g/admission.hpp"
#include "detnet5g/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace detnet5g {

enum class SourceMode { Periodic, BurstPeriodic, GreedyTokenBucket, OnOffBackground };

std::string_view to_string(SourceMode m);

struct SourceModel {
    SourceMode mode = SourceMode::GreedyTokenBucket;
    Bytes pkt_B = 0;
    // periodic and burst_periodic
    Micros period{0};
    int burst_count = 1;
    // greedy_token_bucket (0 = take the flow's TSpec) and onoff_background
    Bytes burst_B = 0;
    BytesPerSec rate_Bps = 0;
    // onoff_background; with random_onoff these are exponential means
    Micros on{0};
    Micros off{0};
    bool random_onoff = false;
    Micros start{0};
    // Adds a seeded offset in [0, period) to the start.
    bool random_phase = true;

    bool operator==(const SourceModel&) const = default;
};

struct ScenarioFlow {
    FlowSpec spec;
    // Critical flows must be admitted; the others travel as best effort.
    bool critical = true;
    SourceModel source;

    bool operator==(const ScenarioFlow&) const = default;
};

// Unregistered class-0 load.
struct BackgroundSource {
    std::string id;
    NodeId src;
    NodeId dst;
    SourceModel source;

    bool operator==(const BackgroundSource&) const = default;
};

// UE report that the 5G poller sees from `at` onwards.
struct UeSnapshot {
    Micros at{0};
    std::vector<UeRecord> ues;

    bool operator==(const UeSnapshot&) const = default;
};

struct SimSettings {
    Micros duration{1'000'000};
    std::uint64_t seed = 1;
    bool background_enabled = true;
    std::vector<BackgroundSource> background;
    std::vector<UeSnapshot> snapshots;
    // Extra time after the sources stop for queues to empty.
    Micros drain{5'000'000};

    bool operator==(const SimSettings&) const = default;
};

struct Scenario {
    Topology topology;
    AdmissionOptions admission;
    std::vector<ScenarioFlow> flows;
    SimSettings sim;

    bool operator==(const Scenario&) const = default;
};

// Parse functions throw ParseError for syntax and schema problems, with the
// offending line or field path in the message.
Topology parse_topology(std::string_view text, const std::string& origin = "<topology>");
Topology load_topology_file(const std::filesystem::path& path);

// "topology_file" members resolve against base_dir.
Scenario parse_scenario(std::string_view text, const std::string& origin = "<scenario>",
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

std::vector<ScenarioFlow> parse_flows(std::string_view text, const std::string& origin = "<flows>");
std::vector<ScenarioFlow> load_flows_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Semantic checks beyond the schema: endpoints exist, the topology is
// valid, sources conform to their TSpec. Throws ScenarioInvalid.
void validate_scenario(const Scenario& s);

} // namespace detnet5g
