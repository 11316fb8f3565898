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
#include "detnet5g/scenario.hpp"
#include "random_scenario.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace detnet5g;
using json = nlohmann::json;

namespace {

Topology canonical()
{
    return load_topology_file(std::string(DETNET5G_TEST_DATA_DIR) + "/canonical_topology.json");
}

FlowSpec spec(std::string id, std::string src, std::string dst, BytesPerSec rate, Bytes burst,
              Bytes max_pkt, std::int64_t deadline_us, bool dejitter = false)
{
    return FlowSpec{std::move(id), std::move(src), std::move(dst), rate, burst, max_pkt,
                    Micros{deadline_us}, dejitter};
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::ParseError;
}

void expect_guarantees(const NetworkManager& mgr)
{
    for (const auto& [id, f] : mgr.state().flows) {
        EXPECT_LE(f.assignment.e2e_bound, f.spec.deadline) << id;
        EXPECT_GE(f.assignment.priority_class, 1) << id;
    }
    for (const auto& [port, st] : mgr.state().ports) {
        Bytes sum = 0;
        for (int c = 1; c < st.class_count(); ++c)
            if (st.classes[c].rate_Bps > 0)
                sum += backlog_bound(st, c);
        EXPECT_LE(sum, st.buffer_B) << port.str();
    }
    EXPECT_EQ(mgr.recompute_ports(), mgr.state().ports);
}

} // namespace

TEST(Register, CanonicalUplinkFlow)
{
    NetworkManager mgr(canonical());
    const auto d = mgr.register_flow(spec("orange", "UE1", "D", 12'500, 1250, 100, 100'000));
    ASSERT_TRUE(d.accepted) << d.detail;
    const auto& a = *d.assignment;
    EXPECT_EQ(a.priority_class, 7);
    EXPECT_EQ(a.vlan_id, 100);
    EXPECT_EQ(a.per_hop_bounds, (std::vector<Micros>{Micros{22'000}, Micros{24'200}}));
    EXPECT_EQ(a.transit_bound, Micros{3'000});
    EXPECT_EQ(a.regulator_bound, Micros{0});
    EXPECT_EQ(a.e2e_bound, Micros{49'200});
    EXPECT_EQ(a.fiveg, Direction::Uplink);
    expect_guarantees(mgr);
}

TEST(Register, RegulatorTermAdded)
{
    AdmissionOptions o;
    o.hold = Micros{3'000};
    o.release_period = Micros{8'000};
    NetworkManager mgr(canonical(), o);
    const auto d = mgr.register_flow(spec("orange", "UE1", "D", 12'500, 200, 100, 100'000, true));
    ASSERT_TRUE(d.accepted) << d.detail;
    EXPECT_EQ(d.assignment->regulator_bound, Micros{3'000 + 8'000});
    ASSERT_TRUE(d.assignment->regulator);
    EXPECT_EQ(d.assignment->regulator->hold, Micros{3'000});
}

TEST(Register, DefaultRegulatorUsesTransitJitterAndPacketPeriod)
{
    NetworkManager mgr(canonical());
    const auto d = mgr.register_flow(spec("orange", "UE1", "D", 12'500, 200, 100, 100'000, true));
    ASSERT_TRUE(d.accepted) << d.detail;
    EXPECT_EQ(d.assignment->regulator->hold, Micros{2'500});
    EXPECT_EQ(d.assignment->regulator->release_period, Micros{8'000});
}

TEST(Register, TinyDeadlineIsInfeasible)
{
    NetworkManager mgr(canonical());
    const auto d = mgr.register_flow(spec("x", "H2", "D", 12'500, 1250, 100, 1));
    EXPECT_FALSE(d.accepted);
    EXPECT_EQ(d.reason, RejectReason::DeadlineInfeasible);
}

TEST(Register, InvalidSpecs)
{
    NetworkManager mgr(canonical());
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "H2", 1, 10, 10, 100)).reason, RejectReason::InvalidSpec);
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "D", 0, 10, 10, 100)).reason, RejectReason::InvalidSpec);
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "D", 1, 5, 10, 100)).reason, RejectReason::InvalidSpec);
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "D", 1, 10, 10, 0)).reason, RejectReason::InvalidSpec);
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "Q", 1, 10, 10, 100)).reason, RejectReason::Unreachable);
    ASSERT_TRUE(mgr.register_flow(spec("x", "H2", "D", 100, 100, 100, 1'000'000)).accepted);
    EXPECT_EQ(mgr.register_flow(spec("x", "H2", "D", 100, 100, 100, 1'000'000)).reason,
              RejectReason::InvalidSpec);
}

TEST(Register, ContentionMovesOrRejectsAtomically)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "H2", "D", 20'000, 6'000, 1'000, 140'000)).accepted);
    const auto before = mgr.state();

    // Same port, large burst: cannot share class 7 with "a" without
    // breaking a's deadline.
    const auto d = mgr.register_flow(spec("b", "H2", "D", 20'000, 6'000, 1'000, 400'000));
    ASSERT_TRUE(d.accepted) << d.detail;
    const auto& a_now = mgr.state().flows.at("a").assignment;
    const auto& b_now = *d.assignment;
    EXPECT_TRUE(a_now.priority_class != b_now.priority_class || a_now.tree_index != b_now.tree_index);
    expect_guarantees(mgr);

    // A flow nothing can carry leaves the state untouched.
    const auto snapshot = mgr.state();
    const auto r = mgr.register_flow(spec("c", "H2", "D", 100'000, 20'000, 1'000, 50'000));
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(mgr.state(), snapshot);
    (void)before;
}

TEST(Register, BufferExceeded)
{
    auto topo = canonical();
    for (auto& [_, p] : topo.switches)
        p.port_buffer_B = 2'000;
    NetworkManager mgr(topo);
    const auto d = mgr.register_flow(spec("big", "H2", "D", 1'000, 5'000, 500, 10'000'000));
    EXPECT_FALSE(d.accepted);
    EXPECT_EQ(d.reason, RejectReason::BufferExceeded);
}

TEST(Register, Deterministic)
{
    std::mt19937_64 rng(8);
    const auto topo = oracle::random_fabric(rng);
    std::vector<FlowSpec> flows;
    for (int i = 0; i < 8; ++i)
        flows.push_back(oracle::random_flow_spec(rng, topo, "f" + std::to_string(i)));
    NetworkManager a(topo), b(topo);
    for (const auto& f : flows) {
        const auto da = a.register_flow(f);
        const auto db = b.register_flow(f);
        EXPECT_EQ(da.accepted, db.accepted);
        EXPECT_EQ(da.assignment, db.assignment);
        EXPECT_EQ(da.reconfigured, db.reconfigured);
    }
    EXPECT_EQ(a.state(), b.state());
}

TEST(Remove, AddThenRemoveRestores)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "H2", "D", 10'000, 1'000, 500, 200'000)).accepted);
    const auto before = mgr.state();
    ASSERT_TRUE(mgr.register_flow(spec("b", "UE1", "D", 10'000, 1'000, 500, 200'000)).accepted);
    mgr.remove_flow("b");
    EXPECT_EQ(mgr.state().flows, before.flows);
    EXPECT_EQ(mgr.state().ports, before.ports);
}

TEST(Remove, SurvivorBoundDoesNotGrow)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "H2", "D", 10'000, 1'000, 500, 200'000)).accepted);
    ASSERT_TRUE(mgr.register_flow(spec("b", "H2", "D", 10'000, 1'000, 500, 200'000)).accepted);
    const auto a_before = mgr.state().flows.at("a").assignment;
    mgr.remove_flow("b");
    const auto& a_after = mgr.state().flows.at("a").assignment;
    EXPECT_LE(a_after.e2e_bound, a_before.e2e_bound);
    for (std::size_t i = 0; i < a_after.per_hop_bounds.size() && i < a_before.per_hop_bounds.size(); ++i)
        EXPECT_LE(a_after.per_hop_bounds[i], a_before.per_hop_bounds[i]);
}

TEST(Remove, UnknownFlow)
{
    NetworkManager mgr(canonical());
    EXPECT_EQ(code_of([&] { mgr.remove_flow("ghost"); }), ErrorCode::UnknownFlow);
}

TEST(Nwtt, RouteAndTagForUplinkFlow)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("orange", "UE1", "D", 12'500, 1250, 100, 100'000)).accepted);
    const auto cfg = mgr.config_for_nwtt("orange");
    ASSERT_EQ(cfg.rules.size(), 1u);
    const auto& r = cfg.rules.begin()->second;
    EXPECT_EQ(r.match.src, "UE1");
    EXPECT_EQ(r.match.dst, "D");
    EXPECT_EQ(r.egress.node, "S1");
    EXPECT_EQ(r.vlan_id, 100);
    EXPECT_EQ(r.pcp, 7);
}

TEST(Nwtt, HostFlowIsNotA5GFlow)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("h", "H2", "D", 1'000, 500, 500, 500'000)).accepted);
    EXPECT_EQ(code_of([&] { mgr.config_for_nwtt("h"); }), ErrorCode::NotA5GFlow);
    EXPECT_EQ(code_of([&] { mgr.config_for_nwtt("nope"); }), ErrorCode::UnknownFlow);
    const auto hc = mgr.host_config("h");
    EXPECT_EQ(hc.policer, (TokenBucket{500, 1'000}));
    EXPECT_EQ(hc.pcp, mgr.state().flows.at("h").assignment.priority_class);
}

TEST(Nwtt, TwoUeFlowsGetDistinctRules)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "UE1", "D", 5'000, 500, 100, 200'000)).accepted);
    ASSERT_TRUE(mgr.register_flow(spec("b", "UE2", "H2", 5'000, 500, 100, 200'000)).accepted);
    const auto all = mgr.nwtt_config();
    ASSERT_EQ(all.rules.size(), 2u);
    const auto ra = mgr.config_for_nwtt("a").rules.begin()->second;
    const auto rb = mgr.config_for_nwtt("b").rules.begin()->second;
    EXPECT_NE(ra.match, rb.match);
    EXPECT_NE(ra.match.dst, rb.match.dst);
}

TEST(Snapshot, DepartedUeOrphansItsFlows)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "UE1", "D", 5'000, 500, 100, 200'000)).accepted);
    ASSERT_TRUE(mgr.register_flow(spec("b", "UE2", "D", 5'000, 500, 100, 200'000)).accepted);
    const auto out = mgr.apply_5g_snapshot({UeRecord{"UE1", 1500, 1500, 16}});
    EXPECT_EQ(out.orphaned, std::vector<std::string>{"b"});
    EXPECT_EQ(mgr.state().flows.count("b"), 0u);
    EXPECT_EQ(mgr.state().flows.count("a"), 1u);
    expect_guarantees(mgr);
}

TEST(Snapshot, WorseChannelRecomputesTransit)
{
    NetworkManager mgr(canonical());
    ASSERT_TRUE(mgr.register_flow(spec("a", "UE1", "D", 5'000, 1'000, 100, 200'000)).accepted);
    const auto before = mgr.state().flows.at("a").assignment.transit_bound;
    mgr.apply_5g_snapshot({UeRecord{"UE1", 250, 250, 2}, UeRecord{"UE2", 1500, 1500, 16}});
    ASSERT_EQ(mgr.state().flows.count("a"), 1u);
    EXPECT_GT(mgr.state().flows.at("a").assignment.transit_bound, before);
    expect_guarantees(mgr);
}

TEST(Request, AcceptedWithConfigs)
{
    NetworkManager mgr(canonical());
    const auto resp = json::parse(mgr.handle_flow_request(
        R"({"flow_id":"orange","src":"UE1","dst":"D","rate_Bps":12500,"burst_B":1250,)"
        R"("max_pkt_B":100,"deadline_us":100000,"dejitter":false})"));
    EXPECT_TRUE(resp.at("accepted").get<bool>());
    EXPECT_EQ(resp.at("vlan_id"), 100);
    EXPECT_EQ(resp.at("pcp"), 7);
    EXPECT_EQ(resp.at("e2e_bound_us"), 49'200);
    EXPECT_TRUE(resp.at("reconfigured").empty());
    EXPECT_TRUE(resp.contains("nwtt_config"));
}

TEST(Request, HostFlowCarriesHostConfig)
{
    NetworkManager mgr(canonical());
    const auto resp = json::parse(mgr.handle_flow_request(
        R"({"flow_id":"h","src":"H2","dst":"D","rate_Bps":1000,"burst_B":500,)"
        R"("max_pkt_B":500,"deadline_us":500000})"));
    EXPECT_TRUE(resp.at("accepted").get<bool>());
    EXPECT_TRUE(resp.contains("host_config"));
}

TEST(Request, MissingBurstIsMalformed)
{
    NetworkManager mgr(canonical());
    EXPECT_EQ(code_of([&] {
                  mgr.handle_flow_request(R"({"flow_id":"x","src":"UE1","dst":"D","rate_Bps":1,)"
                                          R"("max_pkt_B":1,"deadline_us":100})");
              }),
              ErrorCode::MalformedRequest);
    EXPECT_EQ(code_of([&] { mgr.handle_flow_request("{not json"); }), ErrorCode::MalformedRequest);
}

TEST(Request, UnknownDestinationIsRejection)
{
    NetworkManager mgr(canonical());
    const auto resp = json::parse(mgr.handle_flow_request(
        R"({"flow_id":"x","src":"UE1","dst":"Mars","rate_Bps":100,"burst_B":100,)"
        R"("max_pkt_B":100,"deadline_us":100000})"));
    EXPECT_FALSE(resp.at("accepted").get<bool>());
    EXPECT_EQ(resp.at("reason"), "Unreachable");
}

TEST(Evaluate, MatchesIncrementalState)
{
    std::mt19937_64 rng(21);
    for (int round = 0; round < 20; ++round) {
        const auto topo = oracle::random_fabric(rng);
        NetworkManager mgr(topo);
        for (int i = 0; i < 6; ++i)
            mgr.register_flow(oracle::random_flow_spec(rng, topo, "f" + std::to_string(i)));
        expect_guarantees(mgr);
    }
}
