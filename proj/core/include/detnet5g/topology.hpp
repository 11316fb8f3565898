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

// Device/link graph of the fixed network plus the 5G segment, and its
// partition into VLAN-tagged spanning trees used for source routing.

#include "detnet5g/common.hpp"
#include "detnet5g/transit5g.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace detnet5g {

struct SwitchProfile {
    int class_count = 8;
    // One entry per class; missing entries read as zero.
    std::vector<Micros> fwd_delay_per_class;
    Bytes port_buffer_B = 64'000;
    BytesPerSec link_rate_Bps = 125'000;

    Micros fwd_delay(int cls) const;
    void validate(const NodeId& id) const;

    bool operator==(const SwitchProfile&) const = default;
};

struct Host {
    NodeId id;
    PortId attach;

    bool operator==(const Host&) const = default;
};

// Undirected switch-to-switch link. Endpoints are stored ordered (a < b);
// identity and ordering ignore the propagation delay.
struct Link {
    PortId a;
    PortId b;
    Micros propagation{0};

    Link() = default;
    Link(PortId x, PortId y, Micros prop = Micros{0});

    bool operator==(const Link& o) const { return a == o.a && b == o.b; }
    std::strong_ordering operator<=>(const Link& o) const;

    bool touches(const NodeId& node) const { return a.node == node || b.node == node; }
    const PortId& end_on(const NodeId& node) const { return a.node == node ? a : b; }
    const PortId& other_end(const NodeId& node) const { return a.node == node ? b : a; }
    std::string str() const;
};

struct Topology {
    std::map<NodeId, SwitchProfile> switches;
    std::map<NodeId, Host> hosts;
    std::optional<TransitNode5G> transit;
    std::set<Link> links;
    std::chrono::seconds fixed_poll_interval{200};
    std::chrono::seconds fiveg_poll_interval{5};
    // Profile given to switches first seen in a neighbor snapshot.
    SwitchProfile default_profile;

    // Throws InvalidTopology (bad references, a port used twice, a transit
    // attach not on a switch) or Disconnected.
    void validate() const;

    bool is_switch(const NodeId& n) const { return switches.count(n) != 0; }
    bool is_host(const NodeId& n) const { return hosts.count(n) != 0; }
    bool is_ue(const NodeId& n) const;
    bool is_transit(const NodeId& n) const { return transit && transit->id == n; }

    // Switch port an endpoint hangs off: a host's attachment, or the NW-TT
    // port for the transit node and every UE behind it.
    std::optional<PortId> attachment(const NodeId& endpoint) const;

    // Node reached by sending out of `egress`: the peer switch, a host, or
    // the transit node.
    std::optional<NodeId> next_node(const PortId& egress) const;
    const Link* link_at(const PortId& port) const;

    bool operator==(const Topology&) const = default;
};

// One lldp-like neighbor record reported by the device owning `local`.
struct NeighborRecord {
    PortId local;
    PortId remote;
};

struct TopologySnapshot {
    std::vector<NeighborRecord> records;
    std::int64_t timestamp_ms = 0;
};

// Unions the reported links into the topology. Links that touch a device
// which reported in this snapshot but that no record mentions are pruned.
// Unknown node ids become switches with the default profile, unless they
// already name a host (whose attachment is then updated).
// Throws ConflictingPort if a port sits in two different links.
Topology merge_snapshot(const Topology& topo, const TopologySnapshot& snap);

struct UeMerge {
    Topology topology;
    // UEs that were registered before but are absent from the report.
    std::vector<std::string> departed;
};

// Replaces the UE set with the reported one. Throws NoTransitNode.
UeMerge merge_5g_snapshot(const Topology& topo, const std::vector<UeRecord>& ues);

struct VlanTree {
    int vlan_id = 0;
    int tree_index = 0;
    std::vector<Link> edges;

    bool contains(const Link& l) const;
    bool operator==(const VlanTree&) const = default;
};

struct TreeOptions {
    std::size_t cap = 64;
    int base_vlan = 100;
};

struct SpanningTrees {
    std::vector<VlanTree> trees;
    bool truncated = false;
};

// All spanning trees of the switch subgraph in lexicographic order of their
// sorted edge lists; vlan_id = base_vlan + tree_index. Throws Disconnected,
// or InvalidTopology if base_vlan + cap would leave 1..4094.
SpanningTrees enumerate_spanning_trees(const Topology& topo, const TreeOptions& opts = {});

// Egress ports crossed from src to dst inside the tree; each is one queuing
// hop. Throws Unreachable if an endpoint has no attachment switch.
std::vector<PortId> path_in_tree(const Topology& topo, const VlanTree& tree, const NodeId& src,
                                 const NodeId& dst);

} // namespace detnet5g
