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

#include "detnet5g/topology.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

namespace detnet5g {

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[b] = a;
        return true;
    }
};

bool switches_connected(const Topology& topo)
{
    if (topo.switches.empty())
        return false;
    std::map<NodeId, std::size_t> index;
    for (const auto& [id, _] : topo.switches)
        index.emplace(id, index.size());
    DisjointSets sets(index.size());
    std::size_t components = index.size();
    for (const auto& l : topo.links) {
        auto ia = index.find(l.a.node);
        auto ib = index.find(l.b.node);
        if (ia != index.end() && ib != index.end() && sets.unite(ia->second, ib->second))
            --components;
    }
    return components == 1;
}

void claim_port(std::map<PortId, std::string>& used, const PortId& p, const std::string& owner)
{
    auto [it, inserted] = used.emplace(p, owner);
    if (!inserted)
        throw Error(ErrorCode::InvalidTopology,
                    "port " + p.str() + " used by both " + it->second + " and " + owner);
}

} // namespace

Micros SwitchProfile::fwd_delay(int cls) const
{
    if (cls < 0 || static_cast<std::size_t>(cls) >= fwd_delay_per_class.size())
        return Micros{0};
    return fwd_delay_per_class[static_cast<std::size_t>(cls)];
}

void SwitchProfile::validate(const NodeId& id) const
{
    if (class_count < 2)
        throw Error(ErrorCode::InvalidTopology, id + ": class_count must be >= 2");
    if (port_buffer_B <= 0)
        throw Error(ErrorCode::InvalidTopology, id + ": port buffer must be positive");
    if (link_rate_Bps <= 0)
        throw Error(ErrorCode::InvalidTopology, id + ": link rate must be positive");
    for (auto d : fwd_delay_per_class) {
        if (d < Micros{0})
            throw Error(ErrorCode::InvalidTopology, id + ": negative forwarding delay");
    }
}

Link::Link(PortId x, PortId y, Micros prop) : a(std::move(x)), b(std::move(y)), propagation(prop)
{
    if (b < a)
        std::swap(a, b);
}

std::strong_ordering Link::operator<=>(const Link& o) const
{
    if (auto c = a <=> o.a; c != 0)
        return c;
    return b <=> o.b;
}

std::string Link::str() const
{
    return a.str() + "-" + b.str();
}

bool Topology::is_ue(const NodeId& n) const
{
    return transit && transit->ues.count(n) != 0;
}

std::optional<PortId> Topology::attachment(const NodeId& endpoint) const
{
    if (auto h = hosts.find(endpoint); h != hosts.end())
        return h->second.attach;
    if (transit && (transit->id == endpoint || transit->ues.count(endpoint) != 0))
        return transit->attach;
    return std::nullopt;
}

const Link* Topology::link_at(const PortId& port) const
{
    for (const auto& l : links) {
        if (l.a == port || l.b == port)
            return &l;
    }
    return nullptr;
}

std::optional<NodeId> Topology::next_node(const PortId& egress) const
{
    if (const Link* l = link_at(egress))
        return l->a == egress ? l->b.node : l->a.node;
    for (const auto& [id, h] : hosts) {
        if (h.attach == egress)
            return id;
    }
    if (transit && transit->attach == egress)
        return transit->id;
    return std::nullopt;
}

void Topology::validate() const
{
    if (switches.empty())
        throw Error(ErrorCode::InvalidTopology, "no switches");
    for (const auto& [id, profile] : switches)
        profile.validate(id);

    std::map<PortId, std::string> used;
    for (const auto& l : links) {
        if (!is_switch(l.a.node) || !is_switch(l.b.node))
            throw Error(ErrorCode::InvalidTopology, "link " + l.str() + " references a non-switch");
        if (l.a.node == l.b.node)
            throw Error(ErrorCode::InvalidTopology, "self-loop " + l.str());
        if (l.propagation < Micros{0})
            throw Error(ErrorCode::InvalidTopology, "negative propagation on " + l.str());
        claim_port(used, l.a, "link " + l.str());
        claim_port(used, l.b, "link " + l.str());
    }
    for (const auto& [id, h] : hosts) {
        if (is_switch(id))
            throw Error(ErrorCode::InvalidTopology, "host id " + id + " collides with a switch");
        if (!is_switch(h.attach.node))
            throw Error(ErrorCode::InvalidTopology, "host " + id + " attaches to unknown switch");
        claim_port(used, h.attach, "host " + id);
    }
    if (transit) {
        if (is_switch(transit->id) || is_host(transit->id))
            throw Error(ErrorCode::InvalidTopology, "transit id " + transit->id + " collides");
        if (!is_switch(transit->attach.node))
            throw Error(ErrorCode::InvalidTopology, "transit node attaches to unknown switch");
        claim_port(used, transit->attach, "transit " + transit->id);
        transit->tdd.validate();
        for (const auto& [ue_id, ue] : transit->ues) {
            if (is_switch(ue_id) || is_host(ue_id) || ue_id == transit->id)
                throw Error(ErrorCode::InvalidTopology, "UE id " + ue_id + " collides");
            if (ue.tbs_ul_B <= 0 || ue.tbs_dl_B <= 0)
                throw Error(ErrorCode::InvalidTopology, "UE " + ue_id + " needs positive TBS");
        }
    }
    if (!switches_connected(*this))
        throw Error(ErrorCode::Disconnected, "switch graph is not connected");
}

Topology merge_snapshot(const Topology& topo, const TopologySnapshot& snap)
{
    std::set<NodeId> reporters;
    std::set<Link> reported;
    std::map<PortId, Link> port_use;
    Topology out = topo;

    for (const auto& rec : snap.records) {
        reporters.insert(rec.local.node);
        const bool local_leaf = out.is_host(rec.local.node) || out.is_transit(rec.local.node);
        const bool remote_leaf = out.is_host(rec.remote.node) || out.is_transit(rec.remote.node);
        if (local_leaf || remote_leaf) {
            // Leaf attachment: the switch side is where the leaf hangs off.
            const PortId& leaf = local_leaf ? rec.local : rec.remote;
            const PortId& sw = local_leaf ? rec.remote : rec.local;
            if (out.is_host(leaf.node))
                out.hosts[leaf.node].attach = sw;
            else
                out.transit->attach = sw;
            continue;
        }
        Link l(rec.local, rec.remote);
        for (const PortId* p : {&l.a, &l.b}) {
            auto [it, inserted] = port_use.emplace(*p, l);
            if (!inserted && !(it->second == l))
                throw Error(ErrorCode::ConflictingPort,
                            p->str() + " appears in " + it->second.str() + " and " + l.str());
        }
        reported.insert(l);
    }

    for (auto it = out.links.begin(); it != out.links.end();) {
        const bool polled = reporters.count(it->a.node) != 0 || reporters.count(it->b.node) != 0;
        if (polled && reported.count(*it) == 0)
            it = out.links.erase(it);
        else
            ++it;
    }
    for (const auto& l : reported) {
        for (const PortId* p : {&l.a, &l.b}) {
            if (!out.is_switch(p->node))
                out.switches.emplace(p->node, out.default_profile);
            const Link* existing = out.link_at(*p);
            if (existing != nullptr && !(*existing == l))
                throw Error(ErrorCode::ConflictingPort,
                            p->str() + " already used by " + existing->str());
        }
        out.links.insert(l);
    }
    return out;
}

UeMerge merge_5g_snapshot(const Topology& topo, const std::vector<UeRecord>& ues)
{
    if (!topo.transit)
        throw Error(ErrorCode::NoTransitNode, "topology has no 5G segment");
    UeMerge result{topo, {}};
    std::map<std::string, UeRecord> next;
    for (const auto& ue : ues)
        next[ue.id] = ue;
    for (const auto& [id, _] : topo.transit->ues) {
        if (next.count(id) == 0)
            result.departed.push_back(id);
    }
    result.topology.transit->ues = std::move(next);
    return result;
}

bool VlanTree::contains(const Link& l) const
{
    return std::find(edges.begin(), edges.end(), l) != edges.end();
}

SpanningTrees enumerate_spanning_trees(const Topology& topo, const TreeOptions& opts)
{
    if (opts.base_vlan < 1 || opts.base_vlan > 4094)
        throw Error(ErrorCode::InvalidTopology, "base VLAN must be within 1..4094");
    if (!switches_connected(topo))
        throw Error(ErrorCode::Disconnected, "switch graph is not connected");

    std::map<NodeId, std::size_t> index;
    for (const auto& [id, _] : topo.switches)
        index.emplace(id, index.size());
    std::vector<Link> edges;
    for (const auto& l : topo.links) {
        if (index.count(l.a.node) != 0 && index.count(l.b.node) != 0)
            edges.push_back(l);
    }
    const std::size_t n = index.size();
    const std::size_t need = n - 1;
    const std::size_t cap =
        std::min<std::size_t>(opts.cap, static_cast<std::size_t>(4094 - opts.base_vlan + 1));

    SpanningTrees out;
    std::vector<std::size_t> chosen;

    // Include-before-exclude over the sorted edge list yields trees in
    // lexicographic order of their edge sequences.
    std::function<void(std::size_t, const DisjointSets&)> walk = [&](std::size_t i,
                                                                    const DisjointSets& sets) {
        if (out.truncated)
            return;
        if (chosen.size() == need) {
            if (out.trees.size() == cap) {
                out.truncated = true;
                return;
            }
            VlanTree t;
            t.tree_index = static_cast<int>(out.trees.size());
            t.vlan_id = opts.base_vlan + t.tree_index;
            for (auto e : chosen)
                t.edges.push_back(edges[e]);
            out.trees.push_back(std::move(t));
            return;
        }
        if (i == edges.size() || chosen.size() + (edges.size() - i) < need)
            return;
        DisjointSets with = sets;
        if (with.unite(index.at(edges[i].a.node), index.at(edges[i].b.node))) {
            chosen.push_back(i);
            walk(i + 1, with);
            chosen.pop_back();
        }
        walk(i + 1, sets);
    };
    walk(0, DisjointSets(n));
    return out;
}

std::vector<PortId> path_in_tree(const Topology& topo, const VlanTree& tree, const NodeId& src,
                                 const NodeId& dst)
{
    if (src == dst)
        return {};
    const auto from = topo.attachment(src);
    const auto to = topo.attachment(dst);
    if (!from || !topo.is_switch(from->node))
        throw Error(ErrorCode::Unreachable, "no attachment switch for " + src);
    if (!to || !topo.is_switch(to->node))
        throw Error(ErrorCode::Unreachable, "no attachment switch for " + dst);

    // Breadth-first walk over tree edges, remembering the edge used.
    std::map<NodeId, const Link*> via;
    std::queue<NodeId> frontier;
    via.emplace(from->node, nullptr);
    frontier.push(from->node);
    while (!frontier.empty() && via.count(to->node) == 0) {
        const NodeId u = frontier.front();
        frontier.pop();
        for (const auto& e : tree.edges) {
            if (!e.touches(u))
                continue;
            const NodeId& v = e.other_end(u).node;
            if (via.emplace(v, &e).second)
                frontier.push(v);
        }
    }
    if (via.count(to->node) == 0)
        throw Error(ErrorCode::Unreachable, "tree " + std::to_string(tree.vlan_id) +
                                                " does not connect " + src + " and " + dst);

    std::vector<PortId> hops{*to};
    for (NodeId v = to->node; via.at(v) != nullptr;) {
        const Link* e = via.at(v);
        const NodeId& u = e->other_end(v).node;
        hops.push_back(e->end_on(u));
        v = u;
    }
    std::reverse(hops.begin(), hops.end());
    return hops;
}

} // namespace detnet5g
