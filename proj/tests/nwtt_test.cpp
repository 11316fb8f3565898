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

#include "detnet5g/nwtt.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <vector>

using namespace detnet5g;
using namespace std::chrono_literals;

namespace {

RegulatorConfig cfg(Micros hold, Micros period, std::size_t cap = 64)
{
    RegulatorConfig c;
    c.hold = hold;
    c.release_period = period;
    c.queue_cap_pkts = cap;
    return c;
}

// Feeds (handle, arrival) pairs and returns departure times in microseconds.
std::vector<std::int64_t> replay(Regulator& reg, const std::vector<Nanos>& arrivals)
{
    std::vector<std::int64_t> out;
    auto take = [&](Nanos t) {
        for (const auto& d : reg.release(t))
            out.push_back(std::chrono::duration_cast<Micros>(d.depart).count());
    };
    Regulator::Handle h = 0;
    for (auto t : arrivals) {
        take(t);
        reg.offer(h++, t);
    }
    take(Nanos{std::numeric_limits<std::int64_t>::max() / 2});
    return out;
}

NwttRule rule(std::string src, std::string dst, std::string id, int vlan, int pcp)
{
    NwttRule r;
    r.match = {std::move(src), std::move(dst), std::move(id)};
    r.egress = PortId{"S1", 3};
    r.vlan_id = vlan;
    r.pcp = pcp;
    return r;
}

} // namespace

TEST(Regulator, FirstPacketSetsRelease)
{
    Regulator reg(cfg(10ms, 1ms));
    EXPECT_EQ(reg.offer(1, Nanos{0}), Regulator::Offer::Enqueued);
    ASSERT_TRUE(reg.next_release());
    EXPECT_EQ(*reg.next_release(), Nanos{10ms});
}

TEST(Regulator, BusyPeriodKeepsSchedule)
{
    Regulator reg(cfg(10ms, 1ms));
    reg.offer(1, Nanos{0});
    reg.offer(2, Nanos{100us});
    EXPECT_EQ(*reg.next_release(), Nanos{10ms});
}

TEST(Regulator, BurstReleasesEveryPeriod)
{
    Regulator reg(cfg(10ms, 1ms));
    EXPECT_EQ(replay(reg, {0us, 100us, 200us}), (std::vector<std::int64_t>{10'000, 11'000, 12'000}));
}

TEST(Regulator, SinglePacketWaitsHold)
{
    Regulator reg(cfg(10ms, 1ms));
    EXPECT_EQ(replay(reg, {Nanos{5ms}}), std::vector<std::int64_t>{15'000});
}

TEST(Regulator, SparseArrivalsReanchor)
{
    Regulator reg(cfg(10ms, 1ms));
    EXPECT_EQ(replay(reg, {0us, 20ms, 45ms}), (std::vector<std::int64_t>{10'000, 30'000, 55'000}));
}

TEST(Regulator, DropsAtCapacity)
{
    Regulator reg(cfg(10ms, 1ms, 2));
    EXPECT_EQ(reg.offer(1, Nanos{0}), Regulator::Offer::Enqueued);
    EXPECT_EQ(reg.offer(2, Nanos{1}), Regulator::Offer::Enqueued);
    EXPECT_EQ(reg.offer(3, Nanos{2}), Regulator::Offer::Dropped);
    EXPECT_EQ(reg.dropped(), 1u);
    EXPECT_EQ(reg.release(Nanos{1s}).size(), 2u);
    EXPECT_EQ(reg.offered(), reg.released() + reg.dropped());
}

TEST(Regulator, ZeroHoldUnitPeriodIsNearlyTransparent)
{
    Regulator reg(cfg(0us, 1us));
    EXPECT_EQ(replay(reg, {0us, 5us, 9us}), (std::vector<std::int64_t>{0, 5, 9}));
}

TEST(Regulator, ConfigValidation)
{
    EXPECT_THROW(cfg(0us, 0us).validate(), Error);
    EXPECT_THROW(cfg(-1us, 1us).validate(), Error);
    EXPECT_THROW(cfg(0us, 1us, 0).validate(), Error);
    EXPECT_NO_THROW(cfg(0us, 1us, 1).validate());
}

TEST(Regulator, DelayBoundFormula)
{
    EXPECT_EQ(regulator_delay_bound(cfg(3ms, 8ms), 200, 100), Micros{11'000});
    EXPECT_EQ(regulator_delay_bound(cfg(3ms, 8ms), 100, 100), Micros{3'000});
    EXPECT_EQ(regulator_delay_bound(cfg(3ms, 8ms), 250, 100), Micros{19'000});
}

TEST(Shaper, ConformingBurstPassesUnchanged)
{
    TokenBucketShaper s(300, 1000);
    EXPECT_EQ(s.shape(100, Nanos{0}), Nanos{0});
    EXPECT_EQ(s.shape(100, Nanos{0}), Nanos{0});
    EXPECT_EQ(s.shape(100, Nanos{0}), Nanos{0});
    // Bucket empty: 100 B at 1000 B/s takes 0.1 s.
    EXPECT_EQ(s.shape(100, Nanos{0}), Nanos{100ms});
    EXPECT_EQ(s.shape(100, Nanos{0}), Nanos{200ms});
}

TEST(Shaper, KeepsOrder)
{
    TokenBucketShaper s(100, 1000);
    const auto a = s.shape(100, Nanos{0});
    const auto b = s.shape(10, Nanos{1});
    EXPECT_LE(a, b);
}

TEST(Classify, AdmittedFlowIsTagged)
{
    NwttConfig c;
    c.add(rule("UE1", "D", "orange", 100, 7));
    const auto out = classify_and_tag(c, {"UE1", "D", "orange"});
    ASSERT_TRUE(std::holds_alternative<Tagged>(out));
    const auto& t = std::get<Tagged>(out);
    EXPECT_EQ(t.vlan_id, 100);
    EXPECT_EQ(t.pcp, 7);
    EXPECT_EQ(t.egress, (PortId{"S1", 3}));
}

TEST(Classify, UnknownFlowIsBestEffort)
{
    NwttConfig c;
    c.add(rule("UE1", "D", "orange", 100, 7));
    EXPECT_TRUE(std::holds_alternative<BestEffort>(classify_and_tag(c, {"UE1", "D", "green"})));
    EXPECT_TRUE(std::holds_alternative<BestEffort>(classify_and_tag(NwttConfig{}, {"UE1", "D", "x"})));
}

TEST(Classify, SameDestinationDifferentUes)
{
    NwttConfig c;
    c.add(rule("UE1", "D", "a", 100, 7));
    c.add(rule("UE2", "D", "b", 101, 6));
    EXPECT_EQ(std::get<Tagged>(classify_and_tag(c, {"UE1", "D", "a"})).vlan_id, 100);
    EXPECT_EQ(std::get<Tagged>(classify_and_tag(c, {"UE2", "D", "b"})).vlan_id, 101);
    EXPECT_TRUE(std::holds_alternative<BestEffort>(classify_and_tag(c, {"UE2", "D", "a"})));
}

TEST(Classify, DuplicateRule)
{
    NwttConfig c;
    c.add(rule("UE1", "D", "a", 100, 7));
    try {
        c.add(rule("UE1", "D", "a", 101, 6));
        FAIL() << "expected DuplicateRule";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateRule);
    }
}
