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

// Central network manager: flow registry plus the joint routing and
// scheduling pipeline that picks a (VLAN tree, priority class) per flow and
// proves every registered deadline and port buffer network-wide.

#include "detnet5g/calculus.hpp"
#include "detnet5g/common.hpp"
#include "detnet5g/nwtt.hpp"
#include "detnet5g/topology.hpp"
#include "detnet5g/transit5g.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detnet5g {

struct FlowSpec {
    std::string flow_id;
    NodeId src;
    NodeId dst;
    BytesPerSec rate_Bps = 0;
    Bytes burst_B = 0;
    Bytes max_pkt_B = 0;
    Micros deadline{0};
    bool dejitter = false;

    // Empty when the invariants hold, otherwise what is wrong.
    std::optional<std::string> invalid_reason() const;

    bool operator==(const FlowSpec&) const = default;
};

enum class RejectReason { InvalidSpec, Unreachable, Unschedulable, DeadlineInfeasible, BufferExceeded };

std::string_view to_string(RejectReason r);

struct FlowAssignment {
    std::string flow_id;
    int vlan_id = 0;
    int tree_index = 0;
    int priority_class = 0;
    // Set for flows that cross the 5G segment.
    std::optional<Direction> fiveg;
    std::vector<PortId> hop_ports;
    std::vector<Micros> per_hop_bounds;
    // Class-aggregate backlog bound at each hop's port.
    std::vector<Bytes> hop_backlog_bounds;
    // The flow's own burst entering each hop.
    std::vector<Bytes> hop_bursts;
    Micros transit_bound{0};
    Micros regulator_bound{0};
    Micros e2e_bound{0};
    std::optional<RegulatorConfig> regulator;

    bool operator==(const FlowAssignment&) const = default;
};

struct HostConfig {
    std::string flow_id;
    FlowMatch match;
    int vlan_id = 0;
    int pcp = 0;
    TokenBucket policer;

    bool operator==(const HostConfig&) const = default;
};

struct AdmissionOptions {
    bool reconfiguration = true;
    TreeOptions trees;
    // Blocking term assumed at every port even with no registered
    // lower-priority flow.
    Bytes best_effort_max_pkt_B = 1500;
    // Regulator parameters. Unset hold defaults to the UE's transit jitter,
    // unset period to the flow's packet period max_pkt / rate.
    bool dejitter_enabled = true;
    std::optional<Micros> hold;
    std::optional<Micros> release_period;
    std::size_t regulator_queue_cap = 64;
    MatchMode regulator_mode = MatchMode::PerFlow;
    // Tree used by unregistered best-effort traffic.
    int best_effort_tree = 0;

    bool operator==(const AdmissionOptions&) const = default;
};

struct Decision {
    bool accepted = false;
    std::optional<FlowAssignment> assignment;
    RejectReason reason = RejectReason::InvalidSpec;
    std::string detail;
    std::vector<std::string> reconfigured;
};

struct RegisteredFlow {
    FlowSpec spec;
    FlowAssignment assignment;

    bool operator==(const RegisteredFlow&) const = default;
};

struct NetworkState {
    Topology topology;
    std::vector<VlanTree> trees;
    bool trees_truncated = false;
    std::map<std::string, RegisteredFlow> flows;
    std::map<PortId, PortClassState> ports;
    std::vector<std::string> orphaned;

    bool operator==(const NetworkState&) const = default;
};

// A flow pinned to a candidate (tree, class).
struct Placement {
    const FlowSpec* spec = nullptr;
    int tree_index = 0;
    int priority_class = 0;
};

struct Evaluation {
    bool ok = false;
    RejectReason reason = RejectReason::Unschedulable;
    std::string detail;
    std::map<std::string, FlowAssignment> assignments;
    std::map<PortId, PortClassState> ports;
};

// Full network analysis of a set of placements from scratch: routes, per-port
// class aggregates with hop-to-hop burst propagation (iterated to a fixed
// point), transit and regulator terms, deadline and buffer checks.
Evaluation evaluate(const Topology& topo, const std::vector<VlanTree>& trees,
                    const std::vector<Placement>& placements, const AdmissionOptions& opts);

struct SnapshotOutcome {
    std::vector<std::string> orphaned;
    std::vector<std::string> reconfigured;
    std::vector<std::string> evicted;
};

class NetworkManager {
public:
    // Validates the topology and enumerates its VLAN trees.
    explicit NetworkManager(Topology topo, AdmissionOptions opts = {});

    Decision register_flow(const FlowSpec& spec);
    // Throws UnknownFlow.
    void remove_flow(const std::string& flow_id);

    // JSON request in, JSON response out. Throws MalformedRequest when the
    // request violates the wire schema; rejections are normal responses.
    std::string handle_flow_request(std::string_view request_json);

    // Throws UnknownFlow or NotA5GFlow.
    NwttConfig config_for_nwtt(const std::string& flow_id) const;
    // Rules for every admitted 5G-sourced flow.
    NwttConfig nwtt_config() const;
    // Throws UnknownFlow or NotAHostFlow (5G-sourced flows are policed at the NW-TT).
    HostConfig host_config(const std::string& flow_id) const;

    // Replaces the UE set. Flows of departed UEs are dropped and reported as
    // orphaned; flows that no longer fit are re-placed or evicted.
    SnapshotOutcome apply_5g_snapshot(const std::vector<UeRecord>& ues);

    // Recomputes every port aggregate from the registry alone.
    std::map<PortId, PortClassState> recompute_ports() const;

    std::vector<PortId> best_effort_route(const NodeId& src, const NodeId& dst) const;

    const NetworkState& state() const { return state_; }
    const AdmissionOptions& options() const { return opts_; }
    int usable_class_count() const;

private:
    std::vector<Placement> current_placements() const;
    void commit(const Evaluation& ev, const std::map<std::string, FlowSpec>& specs);
    std::optional<Evaluation> batch_assign(const std::vector<const FlowSpec*>& flows,
                                           std::vector<std::string>* unplaced) const;
    std::vector<std::pair<int, int>> candidates() const;

    NetworkState state_;
    AdmissionOptions opts_;
};

} // namespace detnet5g
