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

// Deterministic discrete-event model of the data plane: policing hosts,
// non-preemptive strict-priority switch ports, the TDD slot server of the
// 5G segment and the NW-TT. Every packet of an admitted flow is checked
// against the bounds the admission pipeline computed.

#include "detnet5g/admission.hpp"
#include "detnet5g/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detnet5g {

struct RunOptions {
    // Unset fields fall back to the scenario.
    std::optional<std::uint64_t> seed{};
    std::optional<bool> dejitter{};
    std::optional<bool> background{};
    // Keeps per-hop timestamps in the trace.
    bool keep_hops = false;
};

struct HopRecord {
    PortId port;
    Nanos enqueue{0};
    Nanos start{0};
    // Arrival at the next node: after transmission, forwarding delay and
    // propagation.
    Nanos leave{0};
};

struct PacketRecord {
    std::string flow_id;
    std::uint64_t seq = 0;
    Bytes size_B = 0;
    Nanos t_send{0};
    std::optional<Nanos> t_recv;
    bool dropped = false;
    std::vector<HopRecord> hops;
};

struct FlowReport {
    std::string flow_id;
    // critical, best_effort or background
    std::string role;
    std::uint64_t emitted = 0;
    std::uint64_t received = 0;
    std::uint64_t lost = 0;
    double min_latency_us = 0;
    double mean_latency_us = 0;
    double max_latency_us = 0;
    double p99_latency_us = 0;
    double jitter_us = 0;
    std::optional<std::int64_t> bound_us;
    std::uint64_t bound_violations = 0;
    std::uint64_t hop_violations = 0;
    std::uint64_t transit_violations = 0;
    std::uint64_t regulator_drops = 0;
};

struct PortReport {
    PortId port;
    int priority_class = 0;
    Bytes backlog_bound_B = 0;
    double max_backlog_B = 0;
    std::uint64_t backlog_violations = 0;
    std::uint64_t drops = 0;
};

struct RunReport {
    std::uint64_t seed = 0;
    bool dejitter = false;
    bool background = false;
    std::int64_t duration_us = 0;
    std::vector<FlowReport> flows;
    std::vector<PortReport> ports;
    std::vector<std::string> warnings;

    // Bound, hop, transit and backlog violations plus loss of critical flows.
    std::uint64_t violations() const;
    const FlowReport* flow(std::string_view id) const;
};

struct RunResult {
    RunReport report;
    std::vector<PacketRecord> trace;
};

// Registers the scenario's critical flows in order. Throws AdmissionMissing
// naming the first rejected one.
NetworkManager admit_scenario(const Scenario& s, bool dejitter);

// Simulates against an already populated manager. Throws ScenarioInvalid or
// AdmissionMissing when a critical flow is not registered.
RunResult run(const Scenario& s, const NetworkManager& admitted, const RunOptions& opts = {});

// Validation, admission and simulation in one step.
RunResult run_scenario(const Scenario& s, const RunOptions& opts = {});

struct DejitterEntry {
    std::string flow_id;
    double jitter_off_us = 0;
    double jitter_on_us = 0;
    double min_off_us = 0;
    double min_on_us = 0;
    double max_off_us = 0;
    double max_on_us = 0;
    bool jitter_reduced = false;
    bool min_not_lower = false;
};

struct DejitterComparison {
    RunResult off;
    RunResult on;
    // One entry per flow that carries a regulator in the "on" run.
    std::vector<DejitterEntry> flows;
};

// Runs the scenario with the regulator off and then on; other options are
// shared. Throws ScenarioInvalid without a regulated 5G flow.
DejitterComparison compare_dejitter(const Scenario& s, RunOptions opts = {});

// Trace CSV: flow_id,seq,size_B,t_send_us,t_recv_us,latency_us,dropped.
std::string trace_csv(const std::vector<PacketRecord>& trace);
std::string report_json(const RunReport& r);
std::string comparison_json(const DejitterComparison& c);

// Recomputes per-flow latency statistics from a trace CSV. Throws ParseError.
std::vector<FlowReport> summarize_trace(std::string_view csv);
std::string summary_json(const std::vector<FlowReport>& flows);

} // namespace detnet5g
