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

#include "detnet5g/codec.hpp"

#include <algorithm>

namespace detnet5g::codec {

namespace {

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string join(const std::string& path, const char* key)
{
    return path.empty() ? std::string(key) : path + "." + key;
}

SwitchProfile profile_from_json(const Reader& r, const SwitchProfile& base)
{
    SwitchProfile p = base;
    p.class_count = static_cast<int>(r.integer_or("class_count", base.class_count));
    p.port_buffer_B = r.integer_or("port_buffer_B", base.port_buffer_B);
    p.link_rate_Bps = r.integer_or("link_rate_Bps", base.link_rate_Bps);
    if (r.has("fwd_delay_us")) {
        const json& fd = r.raw().at("fwd_delay_us");
        p.fwd_delay_per_class.clear();
        if (fd.is_number_integer()) {
            p.fwd_delay_per_class.assign(static_cast<std::size_t>(std::max(p.class_count, 0)),
                                         Micros{fd.get<std::int64_t>()});
        } else if (fd.is_array()) {
            for (const auto& item : fd) {
                if (!item.is_number_integer())
                    r.fail_at("fwd_delay_us", "expected integers");
                p.fwd_delay_per_class.emplace_back(item.get<std::int64_t>());
            }
        } else {
            r.fail_at("fwd_delay_us", "expected an integer or an array of integers");
        }
    }
    return p;
}

json profile_to_json(const SwitchProfile& p)
{
    json fd = json::array();
    for (auto d : p.fwd_delay_per_class)
        fd.push_back(d.count());
    return {{"class_count", p.class_count},
            {"fwd_delay_us", fd},
            {"port_buffer_B", p.port_buffer_B},
            {"link_rate_Bps", p.link_rate_Bps}};
}

PortId port_from(const Reader& r, const char* key)
{
    const std::string text = r.str(key);
    try {
        return PortId::parse(text);
    } catch (const Error& e) {
        r.fail_at(key, e.what());
    }
    return {};
}

} // namespace

json parse_text(std::string_view text, const std::string& origin)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ":" +
                                               std::to_string(col) + ": invalid JSON");
    }
}

Reader::Reader(const json& j, std::string path, ErrorCode code)
    : j_(&j), path_(std::move(path)), code_(code)
{
    if (!j.is_object())
        fail("expected an object");
}

void Reader::fail(const std::string& what) const
{
    throw Error(code_, (path_.empty() ? std::string("<root>") : path_) + ": " + what);
}

void Reader::fail_at(const char* key, const std::string& what) const
{
    throw Error(code_, join(path_, key) + ": " + what);
}

bool Reader::has(const char* key) const
{
    return j_->contains(key) && !(*j_)[key].is_null();
}

const json& Reader::member(const char* key) const
{
    if (!has(key))
        fail_at(key, "missing required field");
    return (*j_)[key];
}

std::string Reader::str(const char* key) const
{
    const json& v = member(key);
    if (!v.is_string())
        fail_at(key, "expected a string");
    return v.get<std::string>();
}

std::int64_t Reader::integer(const char* key) const
{
    const json& v = member(key);
    if (!v.is_number_integer())
        fail_at(key, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        fail_at(key, "out of range");
    return v.get<std::int64_t>();
}

std::int64_t Reader::integer_or(const char* key, std::int64_t fallback) const
{
    return has(key) ? integer(key) : fallback;
}

bool Reader::boolean_or(const char* key, bool fallback) const
{
    if (!has(key))
        return fallback;
    const json& v = (*j_)[key];
    if (!v.is_boolean())
        fail_at(key, "expected true or false");
    return v.get<bool>();
}

std::string Reader::str_or(const char* key, std::string fallback) const
{
    return has(key) ? str(key) : std::move(fallback);
}

Reader Reader::object(const char* key) const
{
    return Reader(member(key), join(path_, key), code_);
}

std::vector<Reader> Reader::array(const char* key, bool required) const
{
    std::vector<Reader> out;
    if (!has(key)) {
        if (required)
            fail_at(key, "missing required field");
        return out;
    }
    const json& v = (*j_)[key];
    if (!v.is_array())
        fail_at(key, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i)
        out.emplace_back(v[i], join(path_, key) + "[" + std::to_string(i) + "]", code_);
    return out;
}

void check_schema_version(const Reader& r)
{
    if (r.has("schema_version") && r.integer("schema_version") != kSchemaVersion)
        r.fail_at("schema_version", "unsupported version (expected 1)");
}

UeRecord ue_from_json(const Reader& r)
{
    UeRecord ue;
    ue.id = r.str("id");
    ue.tbs_ul_B = r.integer("tbs_ul_B");
    ue.tbs_dl_B = r.integer_or("tbs_dl_B", ue.tbs_ul_B);
    ue.mcs_index = static_cast<int>(r.integer_or("mcs_index", 0));
    if (ue.tbs_ul_B < 0 || ue.tbs_dl_B < 0)
        r.fail("TBS must be >= 0");
    return ue;
}

json to_json(const UeRecord& ue)
{
    return {{"id", ue.id},
            {"tbs_ul_B", ue.tbs_ul_B},
            {"tbs_dl_B", ue.tbs_dl_B},
            {"mcs_index", ue.mcs_index}};
}

Topology topology_from_json(const Reader& r)
{
    check_schema_version(r);
    Topology topo;
    if (r.has("default_profile"))
        topo.default_profile = profile_from_json(r.object("default_profile"), SwitchProfile{});
    for (const auto& s : r.array("switches")) {
        const auto id = s.str("id");
        if (!topo.switches.emplace(id, profile_from_json(s, topo.default_profile)).second)
            s.fail_at("id", "duplicate switch '" + id + "'");
    }
    for (const auto& h : r.array("hosts", false)) {
        Host host{h.str("id"), port_from(h, "attach")};
        if (!topo.hosts.emplace(host.id, host).second)
            h.fail_at("id", "duplicate host '" + host.id + "'");
    }
    if (r.has("links")) {
        const json& links = r.raw().at("links");
        if (!links.is_array())
            r.fail_at("links", "expected an array");
        for (std::size_t i = 0; i < links.size(); ++i) {
            const std::string where = join(r.path(), "links") + "[" + std::to_string(i) + "]";
            const json& item = links[i];
            Link link;
            if (item.is_array()) {
                // Compact form: ["S1.1", "S2.1"]
                if (item.size() != 2 || !item[0].is_string() || !item[1].is_string())
                    throw Error(ErrorCode::ParseError, where + ": expected two port strings");
                try {
                    link = Link(PortId::parse(item[0].get<std::string>()),
                                PortId::parse(item[1].get<std::string>()));
                } catch (const Error& e) {
                    throw Error(ErrorCode::ParseError, where + ": " + e.what());
                }
            } else {
                const Reader l(item, where);
                link = Link(port_from(l, "a"), port_from(l, "b"), Micros{l.integer_or("propagation_us", 0)});
            }
            if (!topo.links.insert(link).second)
                throw Error(ErrorCode::ParseError, where + ": duplicate link " + link.str());
        }
    }
    if (r.has("transit5g")) {
        const auto t = r.object("transit5g");
        TransitNode5G node;
        node.id = t.str_or("id", node.id);
        node.attach = port_from(t, "attach");
        node.tdd.pattern = t.str_or("tdd_pattern", node.tdd.pattern);
        node.tdd.numerology = static_cast<int>(t.integer_or("numerology", node.tdd.numerology));
        node.tdd.grant_delay_slots =
            static_cast<int>(t.integer_or("grant_delay_slots", node.tdd.grant_delay_slots));
        node.tdd.s_slot_usable_ul = t.boolean_or("s_slot_usable_ul", node.tdd.s_slot_usable_ul);
        node.tdd.s_slot_usable_dl = t.boolean_or("s_slot_usable_dl", node.tdd.s_slot_usable_dl);
        try {
            node.tdd.validate();
        } catch (const Error& e) {
            t.fail(e.what());
        }
        for (const auto& u : t.array("ues", false)) {
            auto ue = ue_from_json(u);
            if (!node.ues.emplace(ue.id, ue).second)
                u.fail_at("id", "duplicate UE '" + ue.id + "'");
        }
        topo.transit = std::move(node);
    }
    if (r.has("poll_intervals_s")) {
        const auto p = r.object("poll_intervals_s");
        topo.fixed_poll_interval = std::chrono::seconds{p.integer_or("fixed", 200)};
        topo.fiveg_poll_interval = std::chrono::seconds{p.integer_or("fiveg", 5)};
    }
    return topo;
}

json topology_to_json(const Topology& topo)
{
    json switches = json::array();
    for (const auto& [id, p] : topo.switches) {
        json s = profile_to_json(p);
        s["id"] = id;
        switches.push_back(std::move(s));
    }
    json hosts = json::array();
    for (const auto& [id, h] : topo.hosts)
        hosts.push_back({{"id", id}, {"attach", h.attach.str()}});
    json links = json::array();
    for (const auto& l : topo.links)
        links.push_back({{"a", l.a.str()}, {"b", l.b.str()}, {"propagation_us", l.propagation.count()}});
    json out = {{"schema_version", kSchemaVersion},
                {"default_profile", profile_to_json(topo.default_profile)},
                {"switches", switches},
                {"hosts", hosts},
                {"links", links},
                {"poll_intervals_s",
                 {{"fixed", topo.fixed_poll_interval.count()},
                  {"fiveg", topo.fiveg_poll_interval.count()}}}};
    if (topo.transit) {
        const auto& t = *topo.transit;
        json ues = json::array();
        for (const auto& [_, ue] : t.ues)
            ues.push_back(to_json(ue));
        out["transit5g"] = {{"id", t.id},
                            {"attach", t.attach.str()},
                            {"tdd_pattern", t.tdd.pattern},
                            {"numerology", t.tdd.numerology},
                            {"grant_delay_slots", t.tdd.grant_delay_slots},
                            {"s_slot_usable_ul", t.tdd.s_slot_usable_ul},
                            {"s_slot_usable_dl", t.tdd.s_slot_usable_dl},
                            {"ues", ues}};
    }
    return out;
}

FlowSpec flow_spec_from_json(const Reader& r)
{
    FlowSpec s;
    s.flow_id = r.str("flow_id");
    s.src = r.str("src");
    s.dst = r.str("dst");
    s.rate_Bps = r.integer("rate_Bps");
    s.burst_B = r.integer("burst_B");
    s.max_pkt_B = r.integer("max_pkt_B");
    s.deadline = Micros{r.integer("deadline_us")};
    s.dejitter = r.boolean_or("dejitter", false);
    return s;
}

json to_json(const FlowSpec& s)
{
    return {{"flow_id", s.flow_id},         {"src", s.src},
            {"dst", s.dst},                 {"rate_Bps", s.rate_Bps},
            {"burst_B", s.burst_B},         {"max_pkt_B", s.max_pkt_B},
            {"deadline_us", s.deadline.count()}, {"dejitter", s.dejitter}};
}

FlowSpec parse_flow_request(std::string_view text)
{
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error&) {
        throw Error(ErrorCode::MalformedRequest, "request is not valid JSON");
    }
    const Reader r(j, "", ErrorCode::MalformedRequest);
    check_schema_version(r);
    return flow_spec_from_json(r);
}

json to_json(const VlanTree& tree)
{
    json edges = json::array();
    for (const auto& e : tree.edges)
        edges.push_back({e.a.str(), e.b.str()});
    return {{"tree_index", tree.tree_index}, {"vlan_id", tree.vlan_id}, {"edges", edges}};
}

json to_json(const FlowAssignment& a)
{
    json hops = json::array();
    for (std::size_t i = 0; i < a.hop_ports.size(); ++i)
        hops.push_back({{"port", a.hop_ports[i].str()},
                        {"bound_us", a.per_hop_bounds[i].count()},
                        {"backlog_bound_B", a.hop_backlog_bounds[i]},
                        {"burst_B", a.hop_bursts[i]}});
    json out = {{"flow_id", a.flow_id},
                {"vlan_id", a.vlan_id},
                {"tree_index", a.tree_index},
                {"priority_class", a.priority_class},
                {"hops", hops},
                {"transit_bound_us", a.transit_bound.count()},
                {"regulator_bound_us", a.regulator_bound.count()},
                {"e2e_bound_us", a.e2e_bound.count()}};
    if (a.fiveg)
        out["fiveg"] = std::string(to_string(*a.fiveg));
    if (a.regulator)
        out["regulator"] = to_json(*a.regulator);
    return out;
}

json decision_to_json(const Decision& d)
{
    json out = {{"schema_version", kSchemaVersion},
                {"accepted", d.accepted},
                {"reconfigured", d.reconfigured}};
    if (d.accepted && d.assignment) {
        out["vlan_id"] = d.assignment->vlan_id;
        out["pcp"] = d.assignment->priority_class;
        out["e2e_bound_us"] = d.assignment->e2e_bound.count();
        out["assignment"] = to_json(*d.assignment);
    } else {
        out["reason"] = std::string(to_string(d.reason));
        out["detail"] = d.detail;
    }
    return out;
}

json to_json(const RegulatorConfig& cfg)
{
    return {{"hold_us", cfg.hold.count()},
            {"release_period_us", cfg.release_period.count()},
            {"queue_cap_pkts", cfg.queue_cap_pkts},
            {"mode", cfg.mode == MatchMode::PerFlow ? "per_flow" : "per_class"}};
}

json to_json(const NwttConfig& cfg)
{
    json rules = json::array();
    for (const auto& [m, rule] : cfg.rules) {
        json r = {{"match", {{"src", m.src}, {"dst", m.dst}, {"flow_id", m.flow_id}}},
                  {"egress", rule.egress.str()},
                  {"vlan_id", rule.vlan_id},
                  {"pcp", rule.pcp}};
        if (rule.regulator)
            r["regulator"] = to_json(*rule.regulator);
        rules.push_back(std::move(r));
    }
    return {{"rules", rules}};
}

json to_json(const HostConfig& cfg)
{
    return {{"flow_id", cfg.flow_id},
            {"match", {{"src", cfg.match.src}, {"dst", cfg.match.dst}, {"flow_id", cfg.match.flow_id}}},
            {"vlan_id", cfg.vlan_id},
            {"pcp", cfg.pcp},
            {"policer", {{"burst_B", cfg.policer.burst_B}, {"rate_Bps", cfg.policer.rate_Bps}}}};
}

} // namespace detnet5g::codec
