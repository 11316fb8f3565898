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
#include "random_scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

using namespace detnet5g;

namespace {

Scenario canonical()
{
    return load_scenario_file(std::string(DETNET5G_TEST_DATA_DIR) + "/canonical.json");
}

// One switch, two hosts, one periodic flow A -> B.
Scenario single_switch(Bytes pkt, Micros fwd)
{
    Scenario s;
    SwitchProfile p;
    p.fwd_delay_per_class.assign(8, fwd);
    s.topology.switches.emplace("S1", p);
    s.topology.hosts.emplace("A", Host{"A", PortId{"S1", 1}});
    s.topology.hosts.emplace("B", Host{"B", PortId{"S1", 2}});
    ScenarioFlow f;
    f.spec = FlowSpec{"f", "A", "B", 12'500, pkt, pkt, Micros{100'000}, false};
    f.source.mode = SourceMode::Periodic;
    f.source.pkt_B = pkt;
    f.source.period = Micros{ceil_div(pkt * 1'000'000, 12'500)};
    s.flows.push_back(f);
    s.sim.duration = Micros{500'000};
    s.sim.drain = Micros{100'000};
    return s;
}

} // namespace

TEST(Sim, UncontendedPathMatchesAnalyticValue)
{
    const auto r = run_scenario(single_switch(1250, Micros{500}));
    const auto* f = r.report.flow("f");
    ASSERT_NE(f, nullptr);
    ASSERT_GT(f->received, 0u);
    // 1250 B at 125 000 B/s plus 500 us forwarding.
    EXPECT_DOUBLE_EQ(f->max_latency_us, 10'500.0);
    EXPECT_DOUBLE_EQ(f->min_latency_us, 10'500.0);
    EXPECT_EQ(f->jitter_us, 0.0);
    ASSERT_TRUE(f->bound_us);
    EXPECT_LE(f->max_latency_us, static_cast<double>(*f->bound_us));
    EXPECT_EQ(r.report.violations(), 0u);
}

TEST(Sim, ConservationAndOrder)
{
    const auto r = run_scenario(canonical(), RunOptions{.keep_hops = true});
    for (const auto& f : r.report.flows)
        EXPECT_EQ(f.emitted, f.received + f.lost) << f.flow_id;
    std::map<std::string, std::pair<std::uint64_t, Nanos>> last;
    for (const auto& p : r.trace) {
        if (!p.t_recv)
            continue;
        auto& [seq, t] = last[p.flow_id];
        if (seq != 0 || t != Nanos{0}) {
            EXPECT_GT(p.seq, seq);
        }
        seq = p.seq;
        t = *p.t_recv;
        for (std::size_t i = 0; i < p.hops.size(); ++i) {
            EXPECT_LE(p.hops[i].enqueue, p.hops[i].start);
            EXPECT_LE(p.hops[i].start, p.hops[i].leave);
            if (i > 0) {
                EXPECT_LE(p.hops[i - 1].leave, p.hops[i].enqueue);
            }
        }
    }
}

TEST(Sim, NoReorderingWithinFlow)
{
    const auto r = run_scenario(canonical());
    std::map<std::string, std::vector<std::pair<Nanos, std::uint64_t>>> by_flow;
    for (const auto& p : r.trace)
        if (p.t_recv)
            by_flow[p.flow_id].emplace_back(*p.t_recv, p.seq);
    for (auto& [id, v] : by_flow) {
        std::sort(v.begin(), v.end());
        for (std::size_t i = 1; i < v.size(); ++i)
            EXPECT_LT(v[i - 1].second, v[i].second) << id;
    }
}

TEST(Sim, Deterministic)
{
    const auto s = canonical();
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    EXPECT_EQ(trace_csv(a.trace), trace_csv(b.trace));
    EXPECT_EQ(report_json(a.report), report_json(b.report));
}

TEST(Sim, SeedChangesPhases)
{
    auto s = canonical();
    const auto a = run_scenario(s, RunOptions{.seed = 1});
    const auto b = run_scenario(s, RunOptions{.seed = 2});
    EXPECT_NE(trace_csv(a.trace), trace_csv(b.trace));
}

TEST(Sim, CanonicalStaysWithinBounds)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = run_scenario(canonical(), RunOptions{.seed = seed, .background = false});
        EXPECT_EQ(r.report.violations(), 0u) << "seed " << seed;
        const auto* orange = r.report.flow("orange");
        ASSERT_NE(orange, nullptr);
        EXPECT_EQ(orange->lost, 0u);
    }
}

TEST(Sim, UndersizedRegulatorDropsAndWarns)
{
    auto s = canonical();
    s.admission.regulator_queue_cap = 1;
    auto& src = s.flows[0].source;
    src.mode = SourceMode::BurstPeriodic;
    src.burst_count = 2;
    src.period = Micros{16'000};
    s.flows[0].spec.burst_B = 200;
    const auto r = run_scenario(s, RunOptions{.dejitter = true, .background = false});
    const auto* orange = r.report.flow("orange");
    ASSERT_NE(orange, nullptr);
    EXPECT_GT(orange->regulator_drops, 0u);
    EXPECT_FALSE(r.report.warnings.empty());
}

TEST(Sim, TransparentRegulatorIsIdentity)
{
    auto s = canonical();
    s.admission.hold = Micros{0};
    s.admission.release_period = Micros{1};
    const auto c = compare_dejitter(s, RunOptions{.seed = 3, .background = false});
    EXPECT_EQ(trace_csv(c.off.trace), trace_csv(c.on.trace));
}

TEST(Sim, RegulatorCollapsesJitter)
{
    const auto c = compare_dejitter(canonical(), RunOptions{.background = false});
    ASSERT_EQ(c.flows.size(), 1u);
    const auto& e = c.flows[0];
    EXPECT_EQ(e.flow_id, "orange");
    EXPECT_GT(e.jitter_off_us, 0.0);
    EXPECT_LT(e.jitter_on_us, e.jitter_off_us);
    EXPECT_GE(e.min_on_us, e.min_off_us);
    EXPECT_TRUE(e.jitter_reduced);
}

TEST(Sim, CompareNeedsRegulatedFlow)
{
    auto s = canonical();
    for (auto& f : s.flows)
        f.spec.dejitter = false;
    EXPECT_THROW(compare_dejitter(s), Error);
}

TEST(Sim, MissingCriticalAdmission)
{
    auto s = canonical();
    s.flows[0].spec.deadline = Micros{1};
    try {
        run_scenario(s);
        FAIL() << "expected AdmissionMissing";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AdmissionMissing);
    }
}

TEST(Sim, TraceSummaryMatchesReport)
{
    const auto r = run_scenario(canonical());
    const auto summary = summarize_trace(trace_csv(r.trace));
    for (const auto& s : summary) {
        const auto* f = r.report.flow(s.flow_id);
        ASSERT_NE(f, nullptr) << s.flow_id;
        EXPECT_EQ(s.received, f->received);
        EXPECT_EQ(s.lost, f->lost);
        EXPECT_NEAR(s.max_latency_us, f->max_latency_us, 1e-3);
        EXPECT_NEAR(s.min_latency_us, f->min_latency_us, 1e-3);
    }
    EXPECT_THROW(summarize_trace("garbage\n1,2"), Error);
}

TEST(Sim, UeDepartureMidRun)
{
    auto s = canonical();
    s.flows[1].critical = true;
    s.sim.duration = Micros{1'000'000};
    s.sim.snapshots.push_back(UeSnapshot{Micros{400'000}, {UeRecord{"UE1", 1500, 1500, 16}}});
    const auto r = run_scenario(s, RunOptions{.background = false});
    const auto* orange = r.report.flow("orange");
    ASSERT_NE(orange, nullptr);
    EXPECT_EQ(orange->bound_violations, 0u);
    EXPECT_EQ(orange->lost, 0u);
}

TEST(Sim, RandomScenariosAreSound)
{
    std::mt19937_64 rng(77);
    for (int round = 0; round < 6; ++round) {
        auto gen = oracle::random_admitted_scenario(rng);
        const auto r = run(gen.scenario, gen.manager);
        EXPECT_EQ(r.report.violations(), 0u) << "round " << round;
    }
}
