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

#include "detnet5g/scenario.hpp"

#include "detnet5g/codec.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace detnet5g {

namespace {

using codec::Reader;

SourceMode mode_from(const Reader& r, const char* key)
{
    const auto text = r.str(key);
    if (text == "periodic")
        return SourceMode::Periodic;
    if (text == "burst_periodic")
        return SourceMode::BurstPeriodic;
    if (text == "greedy_token_bucket")
        return SourceMode::GreedyTokenBucket;
    if (text == "onoff_background")
        return SourceMode::OnOffBackground;
    r.fail_at(key, "unknown source mode '" + text + "'");
    return SourceMode::Periodic;
}

SourceModel source_from_json(const Reader& r)
{
    SourceModel s;
    s.mode = mode_from(r, "mode");
    s.pkt_B = r.integer("pkt_B");
    s.period = Micros{r.integer_or("period_us", 0)};
    s.burst_count = static_cast<int>(r.integer_or("burst_count", 1));
    s.burst_B = r.integer_or("burst_B", 0);
    s.rate_Bps = r.integer_or("rate_Bps", 0);
    s.on = Micros{r.integer_or("on_ms", 0) * 1000};
    s.off = Micros{r.integer_or("off_ms", 0) * 1000};
    s.random_onoff = r.boolean_or("random_onoff", false);
    s.start = Micros{r.integer_or("start_us", 0)};
    s.random_phase = r.boolean_or("random_phase", true);
    return s;
}

ScenarioFlow flow_from_json(const Reader& r)
{
    ScenarioFlow f;
    f.spec = codec::flow_spec_from_json(r);
    f.critical = r.boolean_or("critical", true);
    if (r.has("source")) {
        f.source = source_from_json(r.object("source"));
    } else {
        f.source.mode = SourceMode::GreedyTokenBucket;
        f.source.pkt_B = f.spec.max_pkt_B;
    }
    return f;
}

std::vector<ScenarioFlow> flows_from(const Reader& r)
{
    std::vector<ScenarioFlow> out;
    for (const auto& f : r.array("flows", false))
        out.push_back(flow_from_json(f));
    return out;
}

void apply_class_count(Topology& topo, int count)
{
    topo.default_profile.class_count = count;
    for (auto& [_, p] : topo.switches)
        p.class_count = count;
}

[[noreturn]] void invalid(const std::string& what)
{
    throw Error(ErrorCode::ScenarioInvalid, what);
}

bool endpoint_exists(const Topology& topo, const NodeId& n)
{
    return topo.is_host(n) || topo.is_ue(n);
}

// Checks that the source never exceeds the (b, r) envelope.
void check_conformance(const ScenarioFlow& f)
{
    const auto& s = f.source;
    const auto& spec = f.spec;
    const std::string who = "flow " + spec.flow_id + ": ";
    switch (s.mode) {
    case SourceMode::Periodic:
    case SourceMode::BurstPeriodic: {
        const Bytes per_period = s.pkt_B * s.burst_count;
        if (per_period > spec.burst_B)
            invalid(who + "one period emits more than the burst");
        if (per_period * 1'000'000 > spec.rate_Bps * s.period.count())
            invalid(who + "source rate exceeds the declared rate");
        break;
    }
    case SourceMode::GreedyTokenBucket:
        if ((s.burst_B != 0 && s.burst_B > spec.burst_B) ||
            (s.rate_Bps != 0 && s.rate_Bps > spec.rate_Bps))
            invalid(who + "shaper parameters exceed the TSpec");
        break;
    case SourceMode::OnOffBackground:
        invalid(who + "onoff_background is reserved for unregistered class-0 load");
    }
}

} // namespace

std::string_view to_string(SourceMode m)
{
    switch (m) {
    case SourceMode::Periodic: return "periodic";
    case SourceMode::BurstPeriodic: return "burst_periodic";
    case SourceMode::GreedyTokenBucket: return "greedy_token_bucket";
    case SourceMode::OnOffBackground: return "onoff_background";
    }
    return "unknown";
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Topology parse_topology(std::string_view text, const std::string& origin)
{
    const auto j = codec::parse_text(text, origin);
    return codec::topology_from_json(Reader(j, ""));
}

Topology load_topology_file(const std::filesystem::path& path)
{
    return parse_topology(read_text_file(path), path.string());
}

std::vector<ScenarioFlow> parse_flows(std::string_view text, const std::string& origin)
{
    const auto j = codec::parse_text(text, origin);
    const Reader r(j, "");
    codec::check_schema_version(r);
    return flows_from(r);
}

std::vector<ScenarioFlow> load_flows_file(const std::filesystem::path& path)
{
    return parse_flows(read_text_file(path), path.string());
}

Scenario parse_scenario(std::string_view text, const std::string& origin,
                        const std::filesystem::path& base_dir)
{
    const auto j = codec::parse_text(text, origin);
    const Reader r(j, "");
    codec::check_schema_version(r);

    Scenario s;
    if (r.has("topology"))
        s.topology = codec::topology_from_json(r.object("topology"));
    else if (r.has("topology_file"))
        s.topology = load_topology_file(base_dir / r.str("topology_file"));
    else
        r.fail("needs either 'topology' or 'topology_file'");

    if (r.has("classes")) {
        const auto c = r.object("classes");
        const auto count = c.integer_or("count", 8);
        if (count < 2 || count > 8)
            c.fail_at("count", "must be in 2..8");
        if (c.integer_or("best_effort_class", 0) != 0)
            c.fail_at("best_effort_class", "class 0 is the only best-effort class");
        apply_class_count(s.topology, static_cast<int>(count));
    }

    s.flows = flows_from(r);

    auto& opts = s.admission;
    if (r.has("nwtt")) {
        const auto nwtt = r.object("nwtt");
        // Regulator settings sit either directly under "nwtt" next to a
        // boolean "dejitter", or inside a "dejitter" object.
        const bool nested = nwtt.has("dejitter") && nwtt.raw().at("dejitter").is_object();
        const auto n = nested ? nwtt.object("dejitter") : nwtt;
        opts.dejitter_enabled = nested ? n.boolean_or("enabled", true)
                                       : n.boolean_or("dejitter", opts.dejitter_enabled);
        if (n.has("hold_us"))
            opts.hold = Micros{n.integer("hold_us")};
        if (n.has("release_period_us"))
            opts.release_period = Micros{n.integer("release_period_us")};
        const auto cap = n.integer_or("queue_cap_pkts", static_cast<std::int64_t>(opts.regulator_queue_cap));
        if (cap < 1)
            n.fail_at("queue_cap_pkts", "must be >= 1");
        opts.regulator_queue_cap = static_cast<std::size_t>(cap);
        const auto mode = n.str_or("mode", "per_flow");
        if (mode == "per_flow")
            opts.regulator_mode = MatchMode::PerFlow;
        else if (mode == "per_class")
            opts.regulator_mode = MatchMode::PerClass;
        else
            n.fail_at("mode", "expected per_flow or per_class");
    }
    if (r.has("routing")) {
        const auto g = r.object("routing");
        opts.best_effort_tree = static_cast<int>(g.integer_or("best_effort_tree", 0));
        opts.reconfiguration = g.boolean_or("reconfiguration", opts.reconfiguration);
        opts.trees.cap = static_cast<std::size_t>(g.integer_or("tree_cap", static_cast<std::int64_t>(opts.trees.cap)));
        opts.trees.base_vlan = static_cast<int>(g.integer_or("base_vlan", opts.trees.base_vlan));
        opts.best_effort_max_pkt_B = g.integer_or("best_effort_max_pkt_B", opts.best_effort_max_pkt_B);
    }

    if (r.has("sim")) {
        const auto m = r.object("sim");
        s.sim.duration = Micros{m.integer_or("duration_ms", 1000) * 1000};
        s.sim.drain = Micros{m.integer_or("drain_ms", 5000) * 1000};
        const auto seed = m.integer_or("seed", 1);
        if (seed < 0)
            m.fail_at("seed", "must be >= 0");
        s.sim.seed = static_cast<std::uint64_t>(seed);
        s.sim.background_enabled = m.boolean_or("background_enabled", true);
        for (const auto& b : m.array("background", false)) {
            BackgroundSource bg;
            bg.id = b.str("id");
            bg.src = b.str("src");
            bg.dst = b.str("dst");
            bg.source = source_from_json(b.object("source"));
            s.sim.background.push_back(std::move(bg));
        }
        for (const auto& snap : m.array("snapshots", false)) {
            UeSnapshot u;
            u.at = Micros{snap.integer("at_ms") * 1000};
            for (const auto& ue : snap.array("ues"))
                u.ues.push_back(codec::ue_from_json(ue));
            s.sim.snapshots.push_back(std::move(u));
        }
    }
    return s;
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
    return parse_scenario(read_text_file(path), path.string(), path.parent_path());
}

void validate_scenario(const Scenario& s)
{
    try {
        s.topology.validate();
    } catch (const Error& e) {
        invalid(std::string("topology: ") + e.what());
    }
    const auto& topo = s.topology;
    if (s.sim.duration <= Micros{0})
        invalid("sim.duration_ms must be positive");
    if (s.sim.drain < Micros{0})
        invalid("sim.drain_ms must be >= 0");
    if (s.admission.best_effort_tree < 0)
        invalid("routing.best_effort_tree must be >= 0");

    std::set<std::string> ids;
    for (const auto& f : s.flows) {
        const auto& spec = f.spec;
        if (!ids.insert(spec.flow_id).second)
            invalid("duplicate flow id '" + spec.flow_id + "'");
        if (auto why = spec.invalid_reason())
            invalid("flow " + spec.flow_id + ": " + *why);
        if (!endpoint_exists(topo, spec.src))
            invalid("flow " + spec.flow_id + ": unknown source " + spec.src);
        if (!endpoint_exists(topo, spec.dst))
            invalid("flow " + spec.flow_id + ": unknown destination " + spec.dst);
        if (topo.is_ue(spec.src) && topo.is_ue(spec.dst))
            invalid("flow " + spec.flow_id + ": UE-to-UE traffic is not modeled");
        const auto& src = f.source;
        if (src.pkt_B <= 0 || src.pkt_B > spec.max_pkt_B)
            invalid("flow " + spec.flow_id + ": packet size must be in 1..max_pkt_B");
        if ((src.mode == SourceMode::Periodic || src.mode == SourceMode::BurstPeriodic) &&
            (src.period <= Micros{0} || src.burst_count < 1))
            invalid("flow " + spec.flow_id + ": periodic sources need period_us > 0");
        if (src.start < Micros{0})
            invalid("flow " + spec.flow_id + ": start_us must be >= 0");
        if (f.critical) {
            check_conformance(f);
            if (spec.dejitter && topo.is_ue(spec.src) && src.pkt_B != spec.max_pkt_B)
                invalid("flow " + spec.flow_id + ": de-jittered flows send max_pkt_B packets");
        } else if (src.mode == SourceMode::OnOffBackground) {
            invalid("flow " + spec.flow_id + ": put onoff_background load under sim.background");
        }
    }
    for (const auto& b : s.sim.background) {
        if (!ids.insert(b.id).second)
            invalid("duplicate source id '" + b.id + "'");
        if (b.source.mode != SourceMode::OnOffBackground)
            invalid("background " + b.id + ": mode must be onoff_background");
        if (!endpoint_exists(topo, b.src) || !endpoint_exists(topo, b.dst) || b.src == b.dst)
            invalid("background " + b.id + ": bad endpoints");
        if (topo.is_ue(b.src) && topo.is_ue(b.dst))
            invalid("background " + b.id + ": UE-to-UE traffic is not modeled");
        if (b.source.pkt_B <= 0 || b.source.rate_Bps <= 0 || b.source.on <= Micros{0} ||
            b.source.off < Micros{0})
            invalid("background " + b.id + ": needs pkt_B, rate_Bps, on_ms > 0 and off_ms >= 0");
    }
    Micros last{-1};
    for (const auto& snap : s.sim.snapshots) {
        if (!topo.transit)
            invalid("UE snapshots need a 5G transit node");
        if (snap.at <= last)
            invalid("UE snapshots must be in strictly increasing time order");
        last = snap.at;
    }
}

} // namespace detnet5g
