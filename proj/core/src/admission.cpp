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

#include "detnet5g/admission.hpp"

#include "detnet5g/codec.hpp"

#include <algorithm>
#include <set>

namespace detnet5g {

namespace {

// Each round either grows some burst by at least one byte or stops; bursts
// are capped by the deadline check, so this is only a safety net.
constexpr int kMaxFixedPointRounds = 10'000;

struct Route {
    std::optional<Direction> fiveg;
    std::string ue;
    std::vector<PortId> hops;
};

Route route_for(const Topology& topo, const VlanTree& tree, const FlowSpec& spec)
{
    const bool src_ue = topo.is_ue(spec.src);
    const bool dst_ue = topo.is_ue(spec.dst);
    if (src_ue && dst_ue)
        throw Error(ErrorCode::Unreachable, "UE-to-UE flows never enter the fixed network");
    if (!src_ue && !topo.is_host(spec.src))
        throw Error(ErrorCode::Unreachable, "unknown source " + spec.src);
    if (!dst_ue && !topo.is_host(spec.dst))
        throw Error(ErrorCode::Unreachable, "unknown destination " + spec.dst);

    Route r;
    NodeId from = spec.src;
    NodeId to = spec.dst;
    if (src_ue) {
        r.fiveg = Direction::Uplink;
        r.ue = spec.src;
        from = topo.transit->id;
    }
    if (dst_ue) {
        r.fiveg = Direction::Downlink;
        r.ue = spec.dst;
        to = topo.transit->id;
    }
    r.hops = path_in_tree(topo, tree, from, to);
    if (r.hops.empty())
        throw Error(ErrorCode::Unreachable, spec.src + " and " + spec.dst + " share an attachment");
    return r;
}

PortClassState blank_port(const Topology& topo, const PortId& port, const AdmissionOptions& opts)
{
    const auto& profile = topo.switches.at(port.node);
    PortClassState s(profile.class_count);
    s.link_rate_Bps = profile.link_rate_Bps;
    s.buffer_B = profile.port_buffer_B;
    s.l_max_floor_B = opts.best_effort_max_pkt_B;
    for (int c = 0; c < profile.class_count; ++c)
        s.fwd_delay[static_cast<std::size_t>(c)] = profile.fwd_delay(c);
    return s;
}

Micros propagation_of(const Topology& topo, const PortId& egress)
{
    const Link* l = topo.link_at(egress);
    return l == nullptr ? Micros{0} : l->propagation;
}

struct Work {
    const FlowSpec* spec = nullptr;
    const VlanTree* tree = nullptr;
    int cls = 0;
    Route route;
    std::vector<Bytes> bursts;
    std::vector<Micros> hop_bounds;
    std::vector<Bytes> hop_backlogs;
    Micros transit{0};
    Micros regulator_bound{0};
    std::optional<RegulatorConfig> regulator;
};

using ClassKey = std::pair<PortId, int>;

} // namespace

std::string_view to_string(RejectReason r)
{
    switch (r) {
    case RejectReason::InvalidSpec: return "InvalidSpec";
    case RejectReason::Unreachable: return "Unreachable";
    case RejectReason::Unschedulable: return "Unschedulable";
    case RejectReason::DeadlineInfeasible: return "DeadlineInfeasible";
    case RejectReason::BufferExceeded: return "BufferExceeded";
    }
    return "Unknown";
}

std::optional<std::string> FlowSpec::invalid_reason() const
{
    if (flow_id.empty())
        return "flow_id is empty";
    if (src.empty() || dst.empty())
        return "source and destination are required";
    if (src == dst)
        return "source equals destination";
    if (rate_Bps <= 0)
        return "rate must be positive";
    if (max_pkt_B <= 0)
        return "max packet size must be positive";
    if (burst_B < max_pkt_B)
        return "burst must hold at least one max-size packet";
    if (deadline <= Micros{0})
        return "deadline must be positive";
    return std::nullopt;
}

Evaluation evaluate(const Topology& topo, const std::vector<VlanTree>& trees,
                    const std::vector<Placement>& placements, const AdmissionOptions& opts)
{
    Evaluation ev;
    auto fail = [&ev](RejectReason r, std::string detail) {
        ev.ok = false;
        ev.reason = r;
        ev.detail = std::move(detail);
        ev.assignments.clear();
        ev.ports.clear();
        return ev;
    };

    std::vector<Work> work;
    work.reserve(placements.size());
    for (const auto& p : placements) {
        if (p.tree_index < 0 || static_cast<std::size_t>(p.tree_index) >= trees.size())
            return fail(RejectReason::Unreachable, "no VLAN tree " + std::to_string(p.tree_index));
        Work w;
        w.spec = p.spec;
        w.tree = &trees[static_cast<std::size_t>(p.tree_index)];
        w.cls = p.priority_class;
        try {
            w.route = route_for(topo, *w.tree, *p.spec);
        } catch (const Error& e) {
            return fail(RejectReason::Unreachable, e.what());
        }
        for (const auto& hop : w.route.hops) {
            if (w.cls < 1 || w.cls >= topo.switches.at(hop.node).class_count)
                return fail(RejectReason::Unschedulable,
                            "class " + std::to_string(w.cls) + " not available at " + hop.str());
        }
        const auto n = w.route.hops.size();
        w.bursts.assign(n, p.spec->burst_B);
        w.hop_bounds.assign(n, Micros{0});
        w.hop_backlogs.assign(n, 0);
        work.push_back(std::move(w));
    }

    for (int round = 0; round < kMaxFixedPointRounds; ++round) {
        std::map<PortId, PortClassState> ports;
        for (const auto& w : work) {
            for (std::size_t i = 0; i < w.route.hops.size(); ++i) {
                const auto& hop = w.route.hops[i];
                auto it = ports.find(hop);
                if (it == ports.end())
                    it = ports.emplace(hop, blank_port(topo, hop, opts)).first;
                auto& agg = it->second.classes[static_cast<std::size_t>(w.cls)];
                agg.burst_B += w.bursts[i];
                agg.rate_Bps += w.spec->rate_Bps;
                agg.max_pkt_B = std::max(agg.max_pkt_B, w.spec->max_pkt_B);
                agg.flows.push_back(w.spec->flow_id);
            }
        }
        for (auto& [_, st] : ports)
            for (auto& agg : st.classes)
                std::sort(agg.flows.begin(), agg.flows.end());

        std::map<ClassKey, Micros> delay;
        std::map<ClassKey, Bytes> backlog;
        std::optional<std::string> buffer_overflow;
        for (auto& [port, st] : ports) {
            Bytes reserved = 0;
            for (int c = 0; c < st.class_count(); ++c) {
                if (st.classes[static_cast<std::size_t>(c)].flows.empty())
                    continue;
                try {
                    delay[{port, c}] = hop_delay_bound(st, c);
                    backlog[{port, c}] = backlog_bound(st, c);
                } catch (const Error& e) {
                    return fail(RejectReason::Unschedulable, port.str() + ": " + e.what());
                }
                reserved += backlog[{port, c}];
            }
            if (reserved > st.buffer_B && !buffer_overflow)
                buffer_overflow = port.str() + " needs " + std::to_string(reserved) + " B of " +
                                  std::to_string(st.buffer_B) + " B";
        }

        bool changed = false;
        for (auto& w : work) {
            const auto n = w.route.hops.size();
            for (std::size_t i = 0; i < n; ++i) {
                const ClassKey key{w.route.hops[i], w.cls};
                w.hop_bounds[i] = delay.at(key) + propagation_of(topo, w.route.hops[i]);
                w.hop_backlogs[i] = backlog.at(key);
                if (i + 1 < n) {
                    const Bytes next =
                        propagate_burst({w.bursts[i], w.spec->rate_Bps}, w.hop_bounds[i]).burst_B;
                    if (next != w.bursts[i + 1]) {
                        w.bursts[i + 1] = next;
                        changed = true;
                    }
                }
            }
        }

        // The UE queue is shared, so the air interface sees the per-UE
        // aggregate of each direction.
        std::map<std::pair<std::string, Direction>, TokenBucket> ue_load;
        for (const auto& w : work) {
            if (!w.route.fiveg)
                continue;
            auto& tb = ue_load[{w.route.ue, *w.route.fiveg}];
            tb.rate_Bps += w.spec->rate_Bps;
            if (*w.route.fiveg == Direction::Uplink)
                tb.burst_B += w.spec->burst_B;
            else
                tb.burst_B +=
                    propagate_burst({w.bursts.back(), w.spec->rate_Bps}, w.hop_bounds.back())
                        .burst_B;
        }
        std::map<std::pair<std::string, Direction>, TransitContract> contracts;
        for (const auto& [key, tb] : ue_load) {
            try {
                contracts[key] =
                    transit_contract(*topo.transit, key.first, key.second, tb.burst_B, tb.rate_Bps);
            } catch (const Error& e) {
                return fail(RejectReason::Unschedulable, key.first + ": " + e.what());
            }
        }

        for (auto& w : work) {
            w.transit = Micros{0};
            w.regulator_bound = Micros{0};
            w.regulator.reset();
            if (w.route.fiveg) {
                const auto& contract = contracts.at({w.route.ue, *w.route.fiveg});
                w.transit = contract.delay_bound;
                if (*w.route.fiveg == Direction::Uplink && w.spec->dejitter &&
                    opts.dejitter_enabled) {
                    RegulatorConfig cfg;
                    cfg.hold = opts.hold.value_or(contract.jitter);
                    cfg.release_period = opts.release_period.value_or(
                        Micros{w.spec->max_pkt_B * 1'000'000 / w.spec->rate_Bps});
                    cfg.queue_cap_pkts = opts.regulator_queue_cap;
                    cfg.mode = opts.regulator_mode;
                    if (cfg.release_period <= Micros{0} || cfg.queue_cap_pkts == 0)
                        return fail(RejectReason::InvalidSpec,
                                    w.spec->flow_id + ": regulator period rounds to zero");
                    if (cfg.release_period.count() * w.spec->rate_Bps >
                        w.spec->max_pkt_B * 1'000'000)
                        return fail(RejectReason::InvalidSpec,
                                    w.spec->flow_id + ": release period slower than the flow");
                    w.regulator = cfg;
                    w.regulator_bound =
                        regulator_delay_bound(cfg, w.spec->burst_B, w.spec->max_pkt_B);
                }
            }
            const Micros e2e = e2e_delay(w.hop_bounds, w.transit, w.regulator_bound);
            if (e2e > w.spec->deadline)
                return fail(RejectReason::DeadlineInfeasible,
                            w.spec->flow_id + ": bound " + std::to_string(e2e.count()) +
                                " us exceeds deadline " + std::to_string(w.spec->deadline.count()) +
                                " us");
        }
        if (buffer_overflow)
            return fail(RejectReason::BufferExceeded, *buffer_overflow);

        if (!changed) {
            for (const auto& w : work) {
                FlowAssignment a;
                a.flow_id = w.spec->flow_id;
                a.vlan_id = w.tree->vlan_id;
                a.tree_index = w.tree->tree_index;
                a.priority_class = w.cls;
                a.fiveg = w.route.fiveg;
                a.hop_ports = w.route.hops;
                a.per_hop_bounds = w.hop_bounds;
                a.hop_backlog_bounds = w.hop_backlogs;
                a.hop_bursts = w.bursts;
                a.transit_bound = w.transit;
                a.regulator_bound = w.regulator_bound;
                a.regulator = w.regulator;
                a.e2e_bound = e2e_delay(w.hop_bounds, w.transit, w.regulator_bound);
                ev.assignments.emplace(a.flow_id, std::move(a));
            }
            ev.ports = std::move(ports);
            ev.ok = true;
            return ev;
        }
    }
    return fail(RejectReason::Unschedulable, "burst propagation did not settle");
}

NetworkManager::NetworkManager(Topology topo, AdmissionOptions opts) : opts_(std::move(opts))
{
    topo.validate();
    auto trees = enumerate_spanning_trees(topo, opts_.trees);
    state_.topology = std::move(topo);
    state_.trees = std::move(trees.trees);
    state_.trees_truncated = trees.truncated;
}

int NetworkManager::usable_class_count() const
{
    int count = 0;
    for (const auto& [_, profile] : state_.topology.switches)
        count = count == 0 ? profile.class_count : std::min(count, profile.class_count);
    return count;
}

std::vector<std::pair<int, int>> NetworkManager::candidates() const
{
    // Highest class first, then lowest tree index.
    std::vector<std::pair<int, int>> out;
    for (int cls = usable_class_count() - 1; cls >= 1; --cls) {
        for (const auto& tree : state_.trees)
            out.emplace_back(cls, tree.tree_index);
    }
    return out;
}

std::vector<Placement> NetworkManager::current_placements() const
{
    std::vector<Placement> out;
    for (const auto& [_, f] : state_.flows)
        out.push_back(Placement{&f.spec, f.assignment.tree_index, f.assignment.priority_class});
    return out;
}

void NetworkManager::commit(const Evaluation& ev, const std::map<std::string, FlowSpec>& specs)
{
    std::map<std::string, RegisteredFlow> flows;
    for (const auto& [id, a] : ev.assignments)
        flows.emplace(id, RegisteredFlow{specs.at(id), a});
    state_.flows = std::move(flows);
    state_.ports = ev.ports;
}

std::optional<Evaluation> NetworkManager::batch_assign(const std::vector<const FlowSpec*>& flows,
                                                       std::vector<std::string>* unplaced) const
{
    std::vector<const FlowSpec*> order = flows;
    std::stable_sort(order.begin(), order.end(), [](const FlowSpec* a, const FlowSpec* b) {
        return std::tie(a->deadline, a->flow_id) < std::tie(b->deadline, b->flow_id);
    });

    std::vector<Placement> placed;
    Evaluation last = evaluate(state_.topology, state_.trees, placed, opts_);
    for (const FlowSpec* spec : order) {
        bool fitted = false;
        for (auto [cls, tree] : candidates()) {
            placed.push_back(Placement{spec, tree, cls});
            Evaluation ev = evaluate(state_.topology, state_.trees, placed, opts_);
            if (ev.ok) {
                last = std::move(ev);
                fitted = true;
                break;
            }
            placed.pop_back();
        }
        if (!fitted) {
            if (unplaced == nullptr)
                return std::nullopt;
            unplaced->push_back(spec->flow_id);
        }
    }
    return last;
}

Decision NetworkManager::register_flow(const FlowSpec& spec)
{
    Decision d;
    if (auto why = spec.invalid_reason()) {
        d.reason = RejectReason::InvalidSpec;
        d.detail = *why;
        return d;
    }
    if (state_.flows.count(spec.flow_id) != 0) {
        d.reason = RejectReason::InvalidSpec;
        d.detail = "flow '" + spec.flow_id + "' is already registered";
        return d;
    }

    std::map<std::string, FlowSpec> specs;
    for (const auto& [id, f] : state_.flows)
        specs.emplace(id, f.spec);
    specs.emplace(spec.flow_id, spec);

    auto placements = current_placements();
    std::optional<Evaluation> first_failure;
    for (auto [cls, tree] : candidates()) {
        placements.push_back(Placement{&spec, tree, cls});
        Evaluation ev = evaluate(state_.topology, state_.trees, placements, opts_);
        placements.pop_back();
        if (ev.ok) {
            commit(ev, specs);
            d.accepted = true;
            d.assignment = state_.flows.at(spec.flow_id).assignment;
            return d;
        }
        if (!first_failure)
            first_failure = std::move(ev);
        // No tree or class can fix a broken endpoint.
        if (first_failure->reason == RejectReason::Unreachable ||
            first_failure->reason == RejectReason::InvalidSpec)
            break;
    }

    const bool retry = opts_.reconfiguration && !state_.flows.empty() && first_failure &&
                       first_failure->reason != RejectReason::Unreachable &&
                       first_failure->reason != RejectReason::InvalidSpec;
    if (retry) {
        std::vector<const FlowSpec*> all;
        for (const auto& [_, s] : specs)
            all.push_back(&s);
        if (auto ev = batch_assign(all, nullptr)) {
            std::vector<std::string> moved;
            for (const auto& [id, f] : state_.flows) {
                const auto& a = ev->assignments.at(id);
                if (a.tree_index != f.assignment.tree_index ||
                    a.priority_class != f.assignment.priority_class)
                    moved.push_back(id);
            }
            commit(*ev, specs);
            d.accepted = true;
            d.assignment = state_.flows.at(spec.flow_id).assignment;
            d.reconfigured = std::move(moved);
            return d;
        }
    }

    if (first_failure) {
        d.reason = first_failure->reason;
        d.detail = first_failure->detail;
    } else {
        d.reason = RejectReason::Unschedulable;
        d.detail = "no usable (tree, class) candidate";
    }
    return d;
}

void NetworkManager::remove_flow(const std::string& flow_id)
{
    if (state_.flows.count(flow_id) == 0)
        throw Error(ErrorCode::UnknownFlow, "flow '" + flow_id + "' is not registered");
    std::map<std::string, FlowSpec> specs;
    for (const auto& [id, f] : state_.flows) {
        if (id != flow_id)
            specs.emplace(id, f.spec);
    }
    std::vector<Placement> placements;
    for (const auto& [id, f] : state_.flows) {
        if (id != flow_id)
            placements.push_back(
                Placement{&specs.at(id), f.assignment.tree_index, f.assignment.priority_class});
    }
    // Removing load never breaks the remaining guarantees.
    Evaluation ev = evaluate(state_.topology, state_.trees, placements, opts_);
    if (!ev.ok)
        throw std::logic_error("remaining flows infeasible after removal: " + ev.detail);
    commit(ev, specs);
}

std::map<PortId, PortClassState> NetworkManager::recompute_ports() const
{
    return evaluate(state_.topology, state_.trees, current_placements(), opts_).ports;
}

NwttConfig NetworkManager::config_for_nwtt(const std::string& flow_id) const
{
    auto it = state_.flows.find(flow_id);
    if (it == state_.flows.end())
        throw Error(ErrorCode::UnknownFlow, "flow '" + flow_id + "' is not registered");
    const auto& [spec, a] = it->second;
    if (a.fiveg != Direction::Uplink)
        throw Error(ErrorCode::NotA5GFlow, "flow '" + flow_id + "' does not leave the 5G system");
    NwttConfig cfg;
    cfg.add(NwttRule{FlowMatch{spec.src, spec.dst, spec.flow_id}, state_.topology.transit->attach,
                     a.vlan_id, a.priority_class, a.regulator});
    return cfg;
}

NwttConfig NetworkManager::nwtt_config() const
{
    NwttConfig cfg;
    for (const auto& [id, f] : state_.flows) {
        if (f.assignment.fiveg == Direction::Uplink)
            cfg.add(config_for_nwtt(id).rules.begin()->second);
    }
    return cfg;
}

HostConfig NetworkManager::host_config(const std::string& flow_id) const
{
    auto it = state_.flows.find(flow_id);
    if (it == state_.flows.end())
        throw Error(ErrorCode::UnknownFlow, "flow '" + flow_id + "' is not registered");
    const auto& [spec, a] = it->second;
    if (a.fiveg == Direction::Uplink)
        throw Error(ErrorCode::NotAHostFlow, "flow '" + flow_id + "' is policed at the NW-TT");
    return HostConfig{spec.flow_id, FlowMatch{spec.src, spec.dst, spec.flow_id}, a.vlan_id,
                      a.priority_class, TokenBucket{spec.burst_B, spec.rate_Bps}};
}

SnapshotOutcome NetworkManager::apply_5g_snapshot(const std::vector<UeRecord>& ues)
{
    auto merged = merge_5g_snapshot(state_.topology, ues);
    merged.topology.validate();
    SnapshotOutcome out;
    const std::set<std::string> departed(merged.departed.begin(), merged.departed.end());

    std::map<std::string, FlowSpec> specs;
    std::map<std::string, FlowAssignment> before;
    for (const auto& [id, f] : state_.flows) {
        if (departed.count(f.spec.src) != 0 || departed.count(f.spec.dst) != 0) {
            out.orphaned.push_back(id);
            continue;
        }
        specs.emplace(id, f.spec);
        before.emplace(id, f.assignment);
    }
    state_.topology = std::move(merged.topology);
    state_.orphaned.insert(state_.orphaned.end(), out.orphaned.begin(), out.orphaned.end());

    std::vector<Placement> placements;
    for (const auto& [id, a] : before)
        placements.push_back(Placement{&specs.at(id), a.tree_index, a.priority_class});
    Evaluation ev = evaluate(state_.topology, state_.trees, placements, opts_);
    if (!ev.ok) {
        // New radio parameters broke something: one batch pass, evicting
        // what still does not fit.
        std::vector<const FlowSpec*> all;
        for (const auto& [_, s] : specs)
            all.push_back(&s);
        ev = *batch_assign(all, &out.evicted);
        for (const auto& id : out.evicted)
            specs.erase(id);
        for (const auto& [id, a] : ev.assignments) {
            const auto& old = before.at(id);
            if (a.tree_index != old.tree_index || a.priority_class != old.priority_class)
                out.reconfigured.push_back(id);
        }
    }
    commit(ev, specs);
    return out;
}

std::vector<PortId> NetworkManager::best_effort_route(const NodeId& src, const NodeId& dst) const
{
    const auto& topo = state_.topology;
    const NodeId from = topo.is_ue(src) ? topo.transit->id : src;
    const NodeId to = topo.is_ue(dst) ? topo.transit->id : dst;
    const auto idx = std::clamp<int>(opts_.best_effort_tree, 0,
                                     static_cast<int>(state_.trees.size()) - 1);
    return path_in_tree(topo, state_.trees[static_cast<std::size_t>(idx)], from, to);
}

std::string NetworkManager::handle_flow_request(std::string_view request_json)
{
    const FlowSpec spec = codec::parse_flow_request(request_json);
    const Decision d = register_flow(spec);
    nlohmann::json resp = codec::decision_to_json(d);
    if (d.accepted) {
        if (d.assignment->fiveg == Direction::Uplink)
            resp["nwtt_config"] = codec::to_json(config_for_nwtt(spec.flow_id));
        else
            resp["host_config"] = codec::to_json(host_config(spec.flow_id));
    }
    return resp.dump();
}

} // namespace detnet5g
