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

#include "detnet5g/sim.hpp"

#include "detnet5g/codec.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <set>

namespace detnet5g {

namespace {

using Wide = __int128;
constexpr std::int64_t kNanoPerSec = 1'000'000'000;

enum class Kind { SourceEmit, NodeArrival, ServiceDone, SlotBoundary, NwttArrival, RegulatorRelease, SnapshotPoll };

struct Event {
    Nanos t;
    std::uint64_t seq;
    Kind kind;
    std::size_t a;
};

struct Later {
    bool operator()(const Event& x, const Event& y) const
    {
        return std::tie(x.t, x.seq) > std::tie(y.t, y.seq);
    }
};

enum class Role { Critical, BestEffort, Background };

std::string role_name(Role r)
{
    switch (r) {
    case Role::Critical: return "critical";
    case Role::BestEffort: return "best_effort";
    case Role::Background: return "background";
    }
    return "";
}

Nanos ns(Micros us)
{
    return std::chrono::duration_cast<Nanos>(us);
}

struct Bounds {
    std::vector<Nanos> hops;
    Nanos transit{0};
    // Source to fabric entry: 5G segment plus regulator.
    Nanos pre_fabric{0};
    Nanos e2e{0};
};

std::shared_ptr<const Bounds> bounds_of(const FlowAssignment& a)
{
    auto b = std::make_shared<Bounds>();
    for (auto h : a.per_hop_bounds)
        b->hops.push_back(ns(h));
    b->transit = ns(a.transit_bound);
    b->pre_fabric = ns(a.transit_bound + a.regulator_bound);
    b->e2e = ns(a.e2e_bound);
    return b;
}

struct Route {
    std::vector<PortId> hops;
    int cls = 0;
};

struct FlowCtx {
    std::string id;
    Role role = Role::BestEffort;
    NodeId src;
    NodeId dst;
    SourceModel source;
    Bytes tb_burst = 0;
    BytesPerSec tb_rate = 0;

    bool registered = false;
    std::shared_ptr<const Bounds> bounds;
    std::shared_ptr<const Route> route;
    std::shared_ptr<const Route> be_route;
    std::optional<Direction> fiveg;
    std::string ue;
    std::optional<std::size_t> regulator;
    std::optional<TokenBucketShaper> shaper;

    bool active = true;
    std::uint64_t next_seq = 0;
    std::mt19937_64 rng;
    Nanos origin{0};
    Nanos on_end{0};
    std::int64_t greedy_n = 0;

    std::uint64_t bound_violations = 0;
    std::uint64_t hop_violations = 0;
    std::uint64_t transit_violations = 0;
    std::uint64_t regulator_drops = 0;
};

struct Pkt {
    std::size_t flow = 0;
    std::uint64_t seq = 0;
    Bytes size = 0;
    Nanos t_send{0};
    std::shared_ptr<const Route> route;
    // Null for traffic without a guarantee.
    std::shared_ptr<const Bounds> bounds;
    std::size_t hop = 0;
    Nanos fiveg_in{0};
    std::optional<Nanos> t_recv;
    bool dropped = false;
    std::vector<HopRecord> hops;
    HopRecord cur_hop;
};

struct PortCtx {
    PortId id;
    BytesPerSec rate = 0;
    Bytes buffer = 0;
    Bytes reserved = 0;
    std::vector<Micros> fwd;
    Micros propagation{0};
    // Class-aggregate backlog bound, or -1 where nothing is registered.
    std::vector<Bytes> bound;
    std::vector<std::deque<std::size_t>> queues;
    std::vector<Bytes> queued;
    bool busy = false;
    std::size_t cur = 0;
    int cur_cls = 0;
    Nanos cur_start{0};
    // byte * 1e9 units
    std::vector<std::int64_t> max_fluid;
    std::vector<std::uint64_t> violations;
    std::vector<std::uint64_t> drops;
    std::vector<bool> used;
};

struct Frag {
    std::size_t pkt;
    Bytes remaining;
    std::int64_t eligible;
};

struct UeQueues {
    std::deque<Frag> admitted;
    std::deque<Frag> best_effort;
    bool empty() const { return admitted.empty() && best_effort.empty(); }
};

struct RegCtx {
    Regulator reg;
    std::optional<Nanos> scheduled;
    std::optional<RegulatorConfig> pending;
};

void fill_stats(FlowReport& r, std::vector<std::int64_t> lat_ns)
{
    r.received = lat_ns.size();
    if (lat_ns.empty())
        return;
    std::sort(lat_ns.begin(), lat_ns.end());
    const auto to_us = [](std::int64_t v) { return static_cast<double>(v) / 1000.0; };
    Wide sum = 0;
    for (auto v : lat_ns)
        sum += v;
    r.min_latency_us = to_us(lat_ns.front());
    r.max_latency_us = to_us(lat_ns.back());
    r.mean_latency_us = static_cast<double>(sum) / static_cast<double>(lat_ns.size()) / 1000.0;
    const auto rank = static_cast<std::size_t>(ceil_div(static_cast<std::int64_t>(lat_ns.size()) * 99, 100));
    r.p99_latency_us = to_us(lat_ns[std::max<std::size_t>(rank, 1) - 1]);
    r.jitter_us = r.max_latency_us - r.min_latency_us;
}

std::string fmt_us(Nanos t)
{
    const auto v = t.count();
    return fmt::format("{}.{:03}", v / 1000, v % 1000);
}

class Simulator {
public:
    Simulator(const Scenario& s, const NetworkManager& mgr, const RunOptions& opts)
        : scenario_(s), mgr_(mgr), keep_hops_(opts.keep_hops)
    {
        seed_ = opts.seed.value_or(s.sim.seed);
        background_ = opts.background.value_or(s.sim.background_enabled);
        end_ = ns(s.sim.duration);
        limit_ = end_ + ns(s.sim.drain);
        if (mgr_.state().topology.transit)
            transit_ = mgr_.state().topology.transit;
        setup_flows();
        nwtt_ = mgr_.nwtt_config();
    }

    RunResult run()
    {
        for (std::size_t f = 0; f < flows_.size(); ++f)
            start_source(f);
        if (transit_ && !scenario_.sim.snapshots.empty()) {
            const Nanos poll = std::chrono::duration_cast<Nanos>(
                mgr_.state().topology.fiveg_poll_interval);
            if (poll > Nanos{0}) {
                for (std::size_t k = 1; Nanos{poll * static_cast<std::int64_t>(k)} <= end_; ++k)
                    push(poll * static_cast<std::int64_t>(k), Kind::SnapshotPoll, k);
            }
        }
        while (!events_.empty()) {
            const Event e = events_.top();
            if (e.t > limit_)
                break;
            events_.pop();
            now_ = e.t;
            dispatch(e);
        }
        return finish();
    }

private:
    void push(Nanos t, Kind k, std::size_t a) { events_.push(Event{t, seq_++, k, a}); }

    void setup_flows()
    {
        const auto& topo = mgr_.state().topology;
        const auto& registry = mgr_.state().flows;
        auto add = [&](const std::string& id, Role role, const NodeId& src, const NodeId& dst,
                       const SourceModel& source, const FlowSpec* spec) {
            FlowCtx f;
            f.id = id;
            f.role = role;
            f.src = src;
            f.dst = dst;
            f.source = source;
            if (spec != nullptr) {
                f.tb_burst = source.burst_B != 0 ? source.burst_B : spec->burst_B;
                f.tb_rate = source.rate_Bps != 0 ? source.rate_Bps : spec->rate_Bps;
            } else {
                f.tb_burst = source.burst_B;
                f.tb_rate = source.rate_Bps;
            }
            if (topo.is_ue(src)) {
                f.fiveg = Direction::Uplink;
                f.ue = src;
            } else if (topo.is_ue(dst)) {
                f.fiveg = Direction::Downlink;
                f.ue = dst;
            }
            std::vector<PortId> be_hops;
            try {
                be_hops = mgr_.best_effort_route(src, dst);
            } catch (const Error& e) {
                throw Error(ErrorCode::ScenarioInvalid, id + ": no best-effort route: " + e.what());
            }
            f.be_route = std::make_shared<Route>(Route{std::move(be_hops), 0});
            f.route = f.be_route;
            std::seed_seq sseq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                               static_cast<std::uint32_t>(flows_.size())};
            f.rng.seed(sseq);
            flows_.push_back(std::move(f));
            return flows_.size() - 1;
        };

        for (const auto& sf : scenario_.flows) {
            const Role role = sf.critical ? Role::Critical : Role::BestEffort;
            const auto idx = add(sf.spec.flow_id, role, sf.spec.src, sf.spec.dst, sf.source, &sf.spec);
            if (!sf.critical)
                continue;
            if (registry.count(sf.spec.flow_id) == 0)
                throw Error(ErrorCode::AdmissionMissing,
                            "critical flow '" + sf.spec.flow_id + "' is not admitted");
            attach_assignment(idx);
        }
        if (background_) {
            for (const auto& bg : scenario_.sim.background)
                add(bg.id, Role::Background, bg.src, bg.dst, bg.source, nullptr);
        }
    }

    void attach_assignment(std::size_t idx)
    {
        auto& f = flows_[idx];
        const auto& reg = mgr_.state().flows.at(f.id);
        const auto& a = reg.assignment;
        f.registered = true;
        f.bounds = bounds_of(a);
        f.route = std::make_shared<Route>(Route{a.hop_ports, a.priority_class});
        if (!f.shaper)
            f.shaper.emplace(reg.spec.burst_B, reg.spec.rate_Bps);
        if (a.regulator) {
            const std::string key = a.regulator->mode == MatchMode::PerFlow
                                        ? "flow:" + f.id
                                        : "class:" + std::to_string(a.priority_class);
            auto it = reg_index_.find(key);
            if (it == reg_index_.end()) {
                regs_.push_back(RegCtx{Regulator(*a.regulator), std::nullopt, std::nullopt});
                it = reg_index_.emplace(key, regs_.size() - 1).first;
            } else if (!(regs_[it->second].reg.config() == *a.regulator)) {
                regs_[it->second].pending = *a.regulator;
            }
            f.regulator = it->second;
        } else {
            f.regulator.reset();
        }
    }

    // Sources

    Nanos phase_span(const FlowCtx& f) const
    {
        const auto& s = f.source;
        switch (s.mode) {
        case SourceMode::Periodic:
        case SourceMode::BurstPeriodic: return ns(s.period);
        case SourceMode::GreedyTokenBucket:
            return f.tb_rate > 0 ? transmission_time_ns(s.pkt_B, f.tb_rate) : Nanos{0};
        case SourceMode::OnOffBackground: return ns(s.on + s.off);
        }
        return Nanos{0};
    }

    Nanos draw_duration(FlowCtx& f, Micros mean)
    {
        if (!f.source.random_onoff || mean <= Micros{0})
            return ns(mean);
        const double u = (static_cast<double>(f.rng() >> 11) + 1.0) * 0x1.0p-53;
        const double v = -std::log(u) * static_cast<double>(ns(mean).count());
        return Nanos{std::max<std::int64_t>(1, static_cast<std::int64_t>(v))};
    }

    void start_source(std::size_t idx)
    {
        auto& f = flows_[idx];
        Nanos origin = ns(f.source.start);
        const Nanos span = phase_span(f);
        if (f.source.random_phase && span > Nanos{0})
            origin += Nanos{static_cast<std::int64_t>(f.rng() % static_cast<std::uint64_t>(span.count()))};
        f.origin = origin;
        if (f.source.mode == SourceMode::OnOffBackground)
            f.on_end = origin + draw_duration(f, f.source.on);
        if (origin < end_)
            push(origin, Kind::SourceEmit, idx);
    }

    void on_emit(std::size_t idx)
    {
        auto& f = flows_[idx];
        if (!f.active)
            return;
        const auto& s = f.source;
        Nanos next{0};
        switch (s.mode) {
        case SourceMode::Periodic:
        case SourceMode::BurstPeriodic:
            for (int i = 0; i < s.burst_count; ++i)
                emit_packet(idx);
            next = now_ + ns(s.period);
            break;
        case SourceMode::GreedyTokenBucket: {
            emit_packet(idx);
            ++f.greedy_n;
            // Earliest instant the (n+1)-th packet fits the envelope.
            const Wide need = static_cast<Wide>(f.greedy_n + 1) * s.pkt_B - f.tb_burst;
            const Wide wait = need <= 0 ? 0 : (need * kNanoPerSec + f.tb_rate - 1) / f.tb_rate;
            next = f.origin + Nanos{static_cast<std::int64_t>(wait)};
            break;
        }
        case SourceMode::OnOffBackground:
            emit_packet(idx);
            next = now_ + transmission_time_ns(s.pkt_B, s.rate_Bps);
            if (next >= f.on_end) {
                next = f.on_end + draw_duration(f, s.off);
                f.on_end = next + draw_duration(f, s.on);
            }
            break;
        }
        if (next < end_)
            push(next, Kind::SourceEmit, idx);
    }

    void emit_packet(std::size_t idx)
    {
        auto& f = flows_[idx];
        Pkt p;
        p.flow = idx;
        p.seq = f.next_seq++;
        p.size = f.source.pkt_B;
        p.t_send = now_;
        const std::size_t pi = pkts_.size();
        pkts_.push_back(std::move(p));
        auto& pkt = pkts_.back();

        if (f.fiveg == Direction::Uplink) {
            pkt.fiveg_in = now_;
            enqueue_5g(pi, f.ue, Direction::Uplink, f.registered);
            return;
        }
        if (f.registered) {
            pkt.route = f.route;
            pkt.bounds = f.bounds;
            push(f.shaper->shape(pkt.size, now_), Kind::NodeArrival, pi);
        } else {
            pkt.route = f.be_route;
            push(now_, Kind::NodeArrival, pi);
        }
    }

    // Checks use the looser of the bound at emission and the current one, so
    // packets in flight across a re-admission are judged fairly.
    Nanos allowed(const Pkt& p, Nanos Bounds::*field) const
    {
        const auto& cur = flows_[p.flow].bounds;
        Nanos v = (*p.bounds).*field;
        if (cur)
            v = std::max(v, (*cur).*field);
        return v;
    }

    Nanos allowed_hop(const Pkt& p, std::size_t hop) const
    {
        Nanos v = hop < p.bounds->hops.size() ? p.bounds->hops[hop] : Nanos{0};
        const auto& cur = flows_[p.flow].bounds;
        if (cur && hop < cur->hops.size())
            v = std::max(v, cur->hops[hop]);
        return v;
    }

    // Fabric

    PortCtx& port_ctx(const PortId& id)
    {
        auto it = port_index_.find(id);
        if (it != port_index_.end())
            return ports_[it->second];
        const auto& topo = mgr_.state().topology;
        const auto& profile = topo.switches.at(id.node);
        PortCtx pc;
        pc.id = id;
        pc.rate = profile.link_rate_Bps;
        pc.buffer = profile.port_buffer_B;
        const auto n = static_cast<std::size_t>(profile.class_count);
        for (int c = 0; c < profile.class_count; ++c)
            pc.fwd.push_back(profile.fwd_delay(c));
        if (const Link* l = topo.link_at(id))
            pc.propagation = l->propagation;
        pc.queues.resize(n);
        pc.queued.assign(n, 0);
        pc.max_fluid.assign(n, 0);
        pc.violations.assign(n, 0);
        pc.drops.assign(n, 0);
        pc.used.assign(n, false);
        refresh_reservation(pc);
        ports_.push_back(std::move(pc));
        port_index_.emplace(id, ports_.size() - 1);
        return ports_.back();
    }

    void refresh_reservation(PortCtx& pc) const
    {
        pc.bound.assign(pc.queues.size(), -1);
        pc.reserved = 0;
        const auto& cache = mgr_.state().ports;
        auto it = cache.find(pc.id);
        if (it == cache.end())
            return;
        for (int c = 0; c < it->second.class_count(); ++c) {
            if (it->second.classes[static_cast<std::size_t>(c)].flows.empty())
                continue;
            const Bytes q = backlog_bound(it->second, c);
            pc.bound[static_cast<std::size_t>(c)] = q;
            pc.reserved += q;
        }
    }

    std::int64_t fluid(const PortCtx& pc, int cls) const
    {
        std::int64_t v = pc.queued[static_cast<std::size_t>(cls)] * kNanoPerSec;
        if (pc.busy && pc.cur_cls == cls) {
            const auto& p = pkts_[pc.cur];
            const std::int64_t left = p.size * kNanoPerSec - (now_ - pc.cur_start).count() * pc.rate;
            v += std::max<std::int64_t>(0, left);
        }
        return v;
    }

    void on_node_arrival(std::size_t pi)
    {
        auto& p = pkts_[pi];
        if (p.hop > 0 && p.bounds) {
            const auto& rec = pkts_[pi].cur_hop;
            if (now_ - rec.enqueue > allowed_hop(p, p.hop - 1))
                ++flows_[p.flow].hop_violations;
        }
        if (p.hop < p.route->hops.size()) {
            enqueue_port(pi, p.route->hops[p.hop]);
            return;
        }
        const auto& f = flows_[p.flow];
        if (f.fiveg == Direction::Downlink) {
            p.fiveg_in = now_;
            enqueue_5g(pi, f.ue, Direction::Downlink, p.bounds != nullptr);
            return;
        }
        receive(pi);
    }

    void enqueue_port(std::size_t pi, const PortId& port)
    {
        auto& pc = port_ctx(port);
        auto& p = pkts_[pi];
        const int cls = p.route->cls;
        const auto c = static_cast<std::size_t>(cls);
        pc.used[c] = true;
        if (cls == 0) {
            Bytes occupied = pc.queued[0];
            if (pc.busy && pc.cur_cls == 0)
                occupied += pkts_[pc.cur].size;
            if (occupied + p.size > pc.buffer - pc.reserved) {
                drop(pi);
                ++pc.drops[0];
                return;
            }
        } else {
            std::int64_t registered = 0;
            for (int k = 1; k < static_cast<int>(pc.queues.size()); ++k)
                registered += fluid(pc, k);
            if (registered + p.size * kNanoPerSec > pc.reserved * kNanoPerSec) {
                drop(pi);
                ++pc.drops[c];
                ++pc.violations[c];
                return;
            }
        }
        pc.queues[c].push_back(pi);
        pc.queued[c] += p.size;
        const auto occ = fluid(pc, cls);
        pc.max_fluid[c] = std::max(pc.max_fluid[c], occ);
        if (pc.bound[c] >= 0 && occ > pc.bound[c] * kNanoPerSec)
            ++pc.violations[c];
        pkts_[pi].cur_hop = HopRecord{port, now_, Nanos{0}, Nanos{0}};
        if (!pc.busy)
            start_service(pc);
    }

    void start_service(PortCtx& pc)
    {
        for (int c = static_cast<int>(pc.queues.size()) - 1; c >= 0; --c) {
            auto& q = pc.queues[static_cast<std::size_t>(c)];
            if (q.empty())
                continue;
            const std::size_t pi = q.front();
            q.pop_front();
            pc.queued[static_cast<std::size_t>(c)] -= pkts_[pi].size;
            pc.busy = true;
            pc.cur = pi;
            pc.cur_cls = c;
            pc.cur_start = now_;
            pkts_[pi].cur_hop.start = now_;
            push(now_ + transmission_time_ns(pkts_[pi].size, pc.rate), Kind::ServiceDone,
                 port_index_.at(pc.id));
            return;
        }
    }

    void on_service_done(std::size_t port)
    {
        auto& pc = ports_[port];
        const std::size_t pi = pc.cur;
        pc.busy = false;
        auto& p = pkts_[pi];
        const Nanos leave = now_ + ns(pc.fwd[static_cast<std::size_t>(pc.cur_cls)] + pc.propagation);
        auto& rec = pkts_[pi].cur_hop;
        rec.leave = leave;
        if (keep_hops_)
            p.hops.push_back(rec);
        ++p.hop;
        push(leave, Kind::NodeArrival, pi);
        start_service(pc);
    }

    // 5G segment

    Nanos slot() const { return transit_->tdd.slot_duration(); }

    void enqueue_5g(std::size_t pi, const std::string& ue, Direction d, bool admitted)
    {
        if (!transit_ || transit_->ues.count(ue) == 0) {
            drop(pi);
            return;
        }
        const std::int64_t k = now_ / slot();
        const std::int64_t eligible = k + 1 + transit_->tdd.grant_delay_slots;
        auto& q = ue_queues_[{ue, d}];
        (admitted ? q.admitted : q.best_effort).push_back(Frag{pi, pkts_[pi].size, eligible});
        if (!slot_pending_) {
            slot_pending_ = true;
            push(slot() * eligible, Kind::SlotBoundary, static_cast<std::size_t>(eligible));
        }
    }

    void serve(std::deque<Frag>& q, Bytes& budget, std::int64_t j, Direction d)
    {
        while (budget > 0 && !q.empty() && q.front().eligible <= j) {
            auto& fr = q.front();
            const Bytes take = std::min(budget, fr.remaining);
            fr.remaining -= take;
            budget -= take;
            if (fr.remaining > 0)
                break;
            const Nanos done = slot() * (j + 1);
            push(done, d == Direction::Uplink ? Kind::NwttArrival : Kind::NodeArrival, fr.pkt);
            if (d == Direction::Downlink)
                dl_done_.emplace(fr.pkt);
            q.pop_front();
        }
    }

    void on_slot(std::int64_t j)
    {
        slot_pending_ = false;
        const auto idx = static_cast<std::size_t>(j) % transit_->tdd.period_slots();
        std::vector<std::pair<std::string, Direction>> keys;
        for (const auto& [key, q] : ue_queues_) {
            if (!q.empty())
                keys.push_back(key);
        }
        const std::size_t n = keys.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& key = keys[(i + static_cast<std::size_t>(j)) % n];
            auto& q = ue_queues_[key];
            auto ue = transit_->ues.find(key.first);
            if (ue == transit_->ues.end()) {
                for (auto* dq : {&q.admitted, &q.best_effort}) {
                    for (const auto& fr : *dq)
                        drop(fr.pkt);
                    dq->clear();
                }
                continue;
            }
            if (!transit_->tdd.usable(idx, key.second))
                continue;
            Bytes budget = ue->second.tbs(key.second);
            // Admitted bytes go first within the UE's grant.
            serve(q.admitted, budget, j, key.second);
            serve(q.best_effort, budget, j, key.second);
        }
        for (const auto& [_, q] : ue_queues_) {
            if (!q.empty()) {
                slot_pending_ = true;
                push(slot() * (j + 1), Kind::SlotBoundary, static_cast<std::size_t>(j + 1));
                break;
            }
        }
    }

    // NW-TT

    void on_nwtt_arrival(std::size_t pi)
    {
        auto& p = pkts_[pi];
        auto& f = flows_[p.flow];
        if (f.registered) {
            p.bounds = f.bounds;
            if (now_ - p.t_send > allowed(p, &Bounds::transit))
                ++f.transit_violations;
        }
        const auto cls = classify_and_tag(nwtt_, PacketMeta{f.src, f.dst, f.id});
        if (std::holds_alternative<BestEffort>(cls) || !f.registered) {
            p.bounds.reset();
            p.route = f.be_route;
            push(now_, Kind::NodeArrival, pi);
            return;
        }
        if (!f.regulator) {
            leave_regulator(pi, now_);
            return;
        }
        const std::size_t ri = *f.regulator;
        settle(ri);
        if (regs_[ri].reg.offer(pi, now_) == Regulator::Offer::Dropped) {
            ++f.regulator_drops;
            drop(pi);
        }
        schedule_release(ri);
    }

    void leave_regulator(std::size_t pi, Nanos t)
    {
        auto& p = pkts_[pi];
        auto& f = flows_[p.flow];
        const Nanos entry = f.shaper->shape(p.size, t);
        if (entry - p.t_send > allowed(p, &Bounds::pre_fabric))
            ++f.transit_violations;
        p.route = f.route;
        push(entry, Kind::NodeArrival, pi);
    }

    void settle(std::size_t ri)
    {
        auto& rc = regs_[ri];
        for (const auto& d : rc.reg.release(now_))
            leave_regulator(d.packet, d.depart);
        if (rc.pending && rc.reg.idle()) {
            rc.reg = Regulator(*rc.pending);
            rc.pending.reset();
        }
    }

    void schedule_release(std::size_t ri)
    {
        auto& rc = regs_[ri];
        const auto next = rc.reg.next_release();
        if (next && rc.scheduled != next) {
            rc.scheduled = next;
            push(*next, Kind::RegulatorRelease, ri);
        }
    }

    void on_regulator_release(std::size_t ri)
    {
        if (regs_[ri].scheduled == now_)
            regs_[ri].scheduled.reset();
        settle(ri);
        schedule_release(ri);
    }

    // Delivery

    void receive(std::size_t pi)
    {
        auto& p = pkts_[pi];
        auto& f = flows_[p.flow];
        p.t_recv = now_;
        if (!p.bounds)
            return;
        if (now_ - p.t_send > allowed(p, &Bounds::e2e))
            ++f.bound_violations;
    }

    void deliver_downlink(std::size_t pi)
    {
        auto& p = pkts_[pi];
        if (p.bounds && now_ - p.fiveg_in > allowed(p, &Bounds::transit))
            ++flows_[p.flow].transit_violations;
        receive(pi);
    }

    void drop(std::size_t pi) { pkts_[pi].dropped = true; }

    // UE polling

    void on_snapshot_poll()
    {
        std::optional<std::size_t> latest;
        for (std::size_t i = 0; i < scenario_.sim.snapshots.size(); ++i) {
            if (ns(scenario_.sim.snapshots[i].at) <= now_)
                latest = i;
        }
        if (!latest || (applied_snapshot_ && *applied_snapshot_ >= *latest))
            return;
        applied_snapshot_ = latest;
        const auto out = mgr_.apply_5g_snapshot(scenario_.sim.snapshots[*latest].ues);
        transit_ = mgr_.state().topology.transit;
        nwtt_ = mgr_.nwtt_config();
        for (auto& pc : ports_)
            refresh_reservation(pc);
        const auto at = fmt_us(now_);
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            auto& f = flows_[i];
            if (!f.registered)
                continue;
            if (mgr_.state().flows.count(f.id) == 0) {
                f.active = false;
                f.registered = false;
                f.bounds.reset();
                warnings_.push_back(fmt::format("t={} us: flow {} lost its admission and stopped", at, f.id));
                continue;
            }
            attach_assignment(i);
        }
        for (const auto& id : out.reconfigured)
            warnings_.push_back(fmt::format("t={} us: flow {} was reconfigured", at, id));
    }

    void dispatch(const Event& e)
    {
        switch (e.kind) {
        case Kind::SourceEmit: on_emit(e.a); break;
        case Kind::NodeArrival:
            if (dl_done_.erase(e.a) != 0) {
                deliver_downlink(e.a);
                break;
            }
            on_node_arrival(e.a);
            break;
        case Kind::ServiceDone: on_service_done(e.a); break;
        case Kind::SlotBoundary: on_slot(static_cast<std::int64_t>(e.a)); break;
        case Kind::NwttArrival: on_nwtt_arrival(e.a); break;
        case Kind::RegulatorRelease: on_regulator_release(e.a); break;
        case Kind::SnapshotPoll: on_snapshot_poll(); break;
        }
    }

    RunResult finish()
    {
        RunResult res;
        auto& rep = res.report;
        rep.seed = seed_;
        rep.dejitter = mgr_.options().dejitter_enabled;
        rep.background = background_;
        rep.duration_us = scenario_.sim.duration.count();

        std::uint64_t stranded = 0;
        std::vector<std::vector<std::int64_t>> lat(flows_.size());
        std::vector<FlowReport> reports(flows_.size());
        res.trace.reserve(pkts_.size());
        for (auto& p : pkts_) {
            if (!p.t_recv && !p.dropped) {
                p.dropped = true;
                ++stranded;
            }
            auto& r = reports[p.flow];
            ++r.emitted;
            if (p.dropped)
                ++r.lost;
            else
                lat[p.flow].push_back((*p.t_recv - p.t_send).count());
            res.trace.push_back(PacketRecord{flows_[p.flow].id, p.seq, p.size, p.t_send, p.t_recv,
                                             p.dropped, std::move(p.hops)});
        }
        if (stranded != 0)
            warnings_.push_back(fmt::format("{} packets still queued when the drain window closed", stranded));

        for (std::size_t i = 0; i < flows_.size(); ++i) {
            const auto& f = flows_[i];
            auto& r = reports[i];
            r.flow_id = f.id;
            r.role = role_name(f.role);
            fill_stats(r, std::move(lat[i]));
            if (f.bounds)
                r.bound_us = std::chrono::duration_cast<Micros>(f.bounds->e2e).count();
            r.bound_violations = f.bound_violations;
            r.hop_violations = f.hop_violations;
            r.transit_violations = f.transit_violations;
            r.regulator_drops = f.regulator_drops;
            if (f.regulator_drops != 0 && f.regulator)
                warnings_.push_back(fmt::format(
                    "regulator queue of flow {} overflowed: {} packets dropped (capacity {})", f.id,
                    f.regulator_drops, regs_[*f.regulator].reg.config().queue_cap_pkts));
            rep.flows.push_back(std::move(r));
        }
        std::sort(rep.flows.begin(), rep.flows.end(),
                  [](const FlowReport& a, const FlowReport& b) { return a.flow_id < b.flow_id; });

        std::vector<const PortCtx*> ordered;
        for (const auto& pc : ports_)
            ordered.push_back(&pc);
        std::sort(ordered.begin(), ordered.end(),
                  [](const PortCtx* a, const PortCtx* b) { return a->id < b->id; });
        for (const auto* pc : ordered) {
            for (std::size_t c = 0; c < pc->queues.size(); ++c) {
                if (!pc->used[c] && pc->bound[c] < 0)
                    continue;
                PortReport pr;
                pr.port = pc->id;
                pr.priority_class = static_cast<int>(c);
                pr.backlog_bound_B = pc->bound[c] < 0 ? 0 : pc->bound[c];
                pr.max_backlog_B = static_cast<double>(pc->max_fluid[c]) / static_cast<double>(kNanoPerSec);
                pr.backlog_violations = pc->violations[c];
                pr.drops = pc->drops[c];
                rep.ports.push_back(pr);
            }
        }
        rep.warnings = std::move(warnings_);
        return res;
    }

    const Scenario& scenario_;
    NetworkManager mgr_;
    bool keep_hops_;
    std::uint64_t seed_ = 0;
    bool background_ = true;
    Nanos end_{0};
    Nanos limit_{0};
    Nanos now_{0};
    std::optional<TransitNode5G> transit_;
    NwttConfig nwtt_;

    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::uint64_t seq_ = 0;

    std::vector<FlowCtx> flows_;
    std::deque<Pkt> pkts_;
    std::vector<PortCtx> ports_;
    std::map<PortId, std::size_t> port_index_;
    std::map<std::pair<std::string, Direction>, UeQueues> ue_queues_;
    bool slot_pending_ = false;
    std::set<std::size_t> dl_done_;
    std::vector<RegCtx> regs_;
    std::map<std::string, std::size_t> reg_index_;
    std::optional<std::size_t> applied_snapshot_;
    std::vector<std::string> warnings_;
};

nlohmann::json flow_report_json(const FlowReport& r)
{
    nlohmann::json j = {{"flow_id", r.flow_id},
                        {"role", r.role},
                        {"emitted", r.emitted},
                        {"received", r.received},
                        {"lost", r.lost},
                        {"min_latency_us", r.min_latency_us},
                        {"mean_latency_us", r.mean_latency_us},
                        {"max_latency_us", r.max_latency_us},
                        {"p99_latency_us", r.p99_latency_us},
                        {"jitter_us", r.jitter_us},
                        {"bound_violations", r.bound_violations},
                        {"hop_violations", r.hop_violations},
                        {"transit_violations", r.transit_violations},
                        {"regulator_drops", r.regulator_drops}};
    j["bound_us"] = r.bound_us ? nlohmann::json(*r.bound_us) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json run_report_json(const RunReport& r)
{
    nlohmann::json flows = nlohmann::json::array();
    for (const auto& f : r.flows)
        flows.push_back(flow_report_json(f));
    nlohmann::json ports = nlohmann::json::array();
    for (const auto& p : r.ports)
        ports.push_back({{"port", p.port.str()},
                         {"class", p.priority_class},
                         {"backlog_bound_B", p.backlog_bound_B},
                         {"max_backlog_B", p.max_backlog_B},
                         {"backlog_violations", p.backlog_violations},
                         {"drops", p.drops}});
    return {{"schema_version", codec::kSchemaVersion},
            {"seed", r.seed},
            {"dejitter", r.dejitter},
            {"background", r.background},
            {"duration_us", r.duration_us},
            {"violations", r.violations()},
            {"flows", flows},
            {"ports", ports},
            {"warnings", r.warnings}};
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string_view::npos)
            return out;
        pos = next + 1;
    }
}

// "<int>.<3 digits>" microseconds back to nanoseconds.
std::int64_t parse_us(std::string_view text, std::size_t line)
{
    const auto dot = text.find('.');
    const auto whole = text.substr(0, dot);
    std::int64_t us = 0;
    std::int64_t frac = 0;
    auto bad = [&] {
        return Error(ErrorCode::ParseError, "trace line " + std::to_string(line) + ": bad time '" +
                                                std::string(text) + "'");
    };
    if (std::from_chars(whole.data(), whole.data() + whole.size(), us).ptr != whole.data() + whole.size())
        throw bad();
    if (dot != std::string_view::npos) {
        auto digits = std::string(text.substr(dot + 1));
        if (digits.empty() || digits.size() > 3)
            throw bad();
        digits.resize(3, '0');
        if (std::from_chars(digits.data(), digits.data() + 3, frac).ptr != digits.data() + 3)
            throw bad();
    }
    return us * 1000 + frac;
}

} // namespace

std::uint64_t RunReport::violations() const
{
    std::uint64_t n = 0;
    for (const auto& f : flows)
        n += f.bound_violations + f.hop_violations + f.transit_violations;
    for (const auto& p : ports)
        n += p.backlog_violations;
    return n;
}

const FlowReport* RunReport::flow(std::string_view id) const
{
    for (const auto& f : flows) {
        if (f.flow_id == id)
            return &f;
    }
    return nullptr;
}

NetworkManager admit_scenario(const Scenario& s, bool dejitter)
{
    auto opts = s.admission;
    opts.dejitter_enabled = dejitter;
    NetworkManager mgr(s.topology, opts);
    for (const auto& f : s.flows) {
        if (!f.critical)
            continue;
        const auto d = mgr.register_flow(f.spec);
        if (!d.accepted)
            throw Error(ErrorCode::AdmissionMissing, "critical flow '" + f.spec.flow_id +
                                                         "' rejected: " + std::string(to_string(d.reason)) +
                                                         " (" + d.detail + ")");
    }
    return mgr;
}

RunResult run(const Scenario& s, const NetworkManager& admitted, const RunOptions& opts)
{
    return Simulator(s, admitted, opts).run();
}

RunResult run_scenario(const Scenario& s, const RunOptions& opts)
{
    validate_scenario(s);
    const auto mgr = admit_scenario(s, opts.dejitter.value_or(s.admission.dejitter_enabled));
    return run(s, mgr, opts);
}

DejitterComparison compare_dejitter(const Scenario& s, RunOptions opts)
{
    validate_scenario(s);
    DejitterComparison out;
    const auto mgr_off = admit_scenario(s, false);
    const auto mgr_on = admit_scenario(s, true);
    std::vector<std::string> regulated;
    for (const auto& [id, f] : mgr_on.state().flows) {
        if (f.assignment.regulator)
            regulated.push_back(id);
    }
    if (regulated.empty())
        throw Error(ErrorCode::ScenarioInvalid, "no 5G-sourced flow with de-jittering requested");
    opts.dejitter.reset();
    out.off = run(s, mgr_off, opts);
    out.on = run(s, mgr_on, opts);
    for (const auto& id : regulated) {
        const auto* a = out.off.report.flow(id);
        const auto* b = out.on.report.flow(id);
        DejitterEntry e;
        e.flow_id = id;
        e.jitter_off_us = a->jitter_us;
        e.jitter_on_us = b->jitter_us;
        e.min_off_us = a->min_latency_us;
        e.min_on_us = b->min_latency_us;
        e.max_off_us = a->max_latency_us;
        e.max_on_us = b->max_latency_us;
        e.jitter_reduced = e.jitter_on_us < e.jitter_off_us;
        e.min_not_lower = e.min_on_us >= e.min_off_us;
        out.flows.push_back(e);
    }
    return out;
}

std::string trace_csv(const std::vector<PacketRecord>& trace)
{
    std::string out = "flow_id,seq,size_B,t_send_us,t_recv_us,latency_us,dropped\n";
    for (const auto& p : trace) {
        if (p.t_recv)
            out += fmt::format("{},{},{},{},{},{},0\n", p.flow_id, p.seq, p.size_B, fmt_us(p.t_send),
                               fmt_us(*p.t_recv), fmt_us(*p.t_recv - p.t_send));
        else
            out += fmt::format("{},{},{},{},,,1\n", p.flow_id, p.seq, p.size_B, fmt_us(p.t_send));
    }
    return out;
}

std::string report_json(const RunReport& r)
{
    return run_report_json(r).dump(2) + "\n";
}

std::string comparison_json(const DejitterComparison& c)
{
    nlohmann::json flows = nlohmann::json::array();
    for (const auto& e : c.flows)
        flows.push_back({{"flow_id", e.flow_id},
                         {"jitter_off_us", e.jitter_off_us},
                         {"jitter_on_us", e.jitter_on_us},
                         {"min_latency_off_us", e.min_off_us},
                         {"min_latency_on_us", e.min_on_us},
                         {"max_latency_off_us", e.max_off_us},
                         {"max_latency_on_us", e.max_on_us},
                         {"jitter_reduced", e.jitter_reduced},
                         {"min_latency_not_lower", e.min_not_lower}});
    nlohmann::json j = {{"schema_version", codec::kSchemaVersion},
                        {"seed", c.on.report.seed},
                        {"background", c.on.report.background},
                        {"violations_off", c.off.report.violations()},
                        {"violations_on", c.on.report.violations()},
                        {"flows", flows}};
    return j.dump(2) + "\n";
}

std::vector<FlowReport> summarize_trace(std::string_view csv)
{
    std::map<std::string, std::pair<FlowReport, std::vector<std::int64_t>>> acc;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto end = csv.find('\n', pos);
        if (end == std::string_view::npos)
            end = csv.size();
        auto line = csv.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line_no == 1) {
            if (line != "flow_id,seq,size_B,t_send_us,t_recv_us,latency_us,dropped")
                throw Error(ErrorCode::ParseError, "trace line 1: unexpected header");
            continue;
        }
        if (line.empty())
            continue;
        const auto cols = split(line, ',');
        if (cols.size() != 7)
            throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": expected 7 columns");
        auto& [r, lat] = acc[std::string(cols[0])];
        r.flow_id = std::string(cols[0]);
        ++r.emitted;
        if (cols[6] == "1") {
            ++r.lost;
        } else if (cols[6] == "0") {
            lat.push_back(parse_us(cols[5], line_no));
        } else {
            throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": dropped must be 0 or 1");
        }
    }
    if (line_no == 0)
        throw Error(ErrorCode::ParseError, "trace is empty");
    std::vector<FlowReport> out;
    for (auto& [_, entry] : acc) {
        fill_stats(entry.first, std::move(entry.second));
        out.push_back(std::move(entry.first));
    }
    return out;
}

std::string summary_json(const std::vector<FlowReport>& flows)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : flows) {
        arr.push_back({{"flow_id", f.flow_id},
                       {"emitted", f.emitted},
                       {"received", f.received},
                       {"lost", f.lost},
                       {"min_latency_us", f.min_latency_us},
                       {"mean_latency_us", f.mean_latency_us},
                       {"max_latency_us", f.max_latency_us},
                       {"p99_latency_us", f.p99_latency_us},
                       {"jitter_us", f.jitter_us}});
    }
    nlohmann::json j = {{"schema_version", codec::kSchemaVersion}, {"flows", arr}};
    return j.dump(2) + "\n";
}

} // namespace detnet5g
