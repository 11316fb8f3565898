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

#include "detnet5g/transit5g.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace detnet5g;

namespace {

TddConfig tdd(std::string pattern, int mu = 1, int grant = 0)
{
    TddConfig t;
    t.pattern = std::move(pattern);
    t.numerology = mu;
    t.grant_delay_slots = grant;
    return t;
}

UeRecord ue(Bytes tbs)
{
    return UeRecord{"UE1", tbs, tbs, 5};
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

oracle::SlotModel model(const TddConfig& t)
{
    return {t.pattern, t.numerology, t.grant_delay_slots, t.s_slot_usable_ul, t.s_slot_usable_dl};
}

} // namespace

TEST(Tdd, SlotDurations)
{
    EXPECT_EQ(tdd("U", 0).slot_duration(), Nanos{1'000'000});
    EXPECT_EQ(tdd("U", 1).slot_duration(), Nanos{500'000});
    EXPECT_EQ(tdd("U", 4).slot_duration(), Nanos{62'500});
    EXPECT_EQ(tdd("DDDSU", 1).period(), Nanos{2'500'000});
}

TEST(Tdd, ValidateRejectsBadInput)
{
    EXPECT_THROW(tdd("").validate(), Error);
    EXPECT_THROW(tdd("DDX").validate(), Error);
    EXPECT_THROW(tdd("DU", 5).validate(), Error);
    EXPECT_THROW(tdd("DU", 1, -1).validate(), Error);
}

TEST(Uplink, AllUplink)
{
    EXPECT_EQ(worst_case_ul_latency(tdd("UUUUU"), ue(1500), 1000, 1000), Micros{1000});
}

TEST(Uplink, Dddsu)
{
    EXPECT_EQ(worst_case_ul_latency(tdd("DDDSU"), ue(1500), 1000, 1000), Micros{3000});
}

TEST(Uplink, RateAboveCapacity)
{
    EXPECT_EQ(code_of([] { worst_case_ul_latency(tdd("DDDSU"), ue(1500), 1000, 700'000); }),
              ErrorCode::RateExceedsCapacity);
    EXPECT_NO_THROW(worst_case_ul_latency(tdd("DDDSU"), ue(1500), 1000, 600'000));
}

TEST(Uplink, NoSlots)
{
    EXPECT_EQ(code_of([] { worst_case_ul_latency(tdd("DDDS"), ue(1500), 100, 1); }),
              ErrorCode::NoUplinkSlots);
}

TEST(Capacity, Examples)
{
    EXPECT_DOUBLE_EQ(ul_capacity(tdd("DDDSU"), ue(1500)), 600'000.0);
    EXPECT_DOUBLE_EQ(ul_capacity(tdd("DDDD"), ue(1500)), 0.0);
    EXPECT_DOUBLE_EQ(ul_capacity(tdd("DDDSU"), ue(3000)), 2 * ul_capacity(tdd("DDDSU"), ue(1500)));
    EXPECT_TRUE(rate_within_capacity(tdd("DDDSU"), Direction::Uplink, 1500, 600'000));
    EXPECT_FALSE(rate_within_capacity(tdd("DDDSU"), Direction::Uplink, 1500, 600'001));
}

TEST(Downlink, AllDownlink)
{
    EXPECT_EQ(worst_case_dl_latency(tdd("DDDDD"), ue(1500), 1000, 1000), Micros{1000});
}

TEST(Downlink, DddsuWithoutSpecialSlotMatchesOracle)
{
    auto t = tdd("DDDSU");
    t.s_slot_usable_dl = false;
    const auto got = worst_case_latency_ns(t, Direction::Downlink, 1500, 3000, 1);
    const auto want = oracle::tdd_worst_latency_ns(model(t), false, 1500, 3000);
    ASSERT_TRUE(want);
    EXPECT_EQ(got.count(), *want);
    EXPECT_EQ(got, Nanos{2'500'000});
}

TEST(Downlink, NoSlots)
{
    auto t = tdd("UUSU");
    t.s_slot_usable_dl = false;
    EXPECT_EQ(code_of([&] { worst_case_dl_latency(t, ue(1500), 100, 1); }), ErrorCode::NoDownlinkSlots);
}

TEST(Contract, Dddsu)
{
    TransitNode5G node;
    node.tdd = tdd("DDDSU");
    node.ues.emplace("UE1", ue(1500));
    const auto c = transit_contract(node, "UE1", Direction::Uplink, 100, 12'500);
    EXPECT_EQ(c.delay_bound, Micros{3000});
    EXPECT_EQ(c.best_case, Micros{500});
    EXPECT_EQ(c.jitter, Micros{2500});
}

TEST(Contract, AllUplinkBestCaseIsOneSlot)
{
    TransitNode5G node;
    node.tdd = tdd("UUUUU");
    node.ues.emplace("UE1", ue(1500));
    const auto c = transit_contract(node, "UE1", Direction::Uplink, 100, 12'500);
    EXPECT_EQ(c.delay_bound, Micros{1000});
    EXPECT_EQ(c.best_case, Micros{500});
}

TEST(Contract, UnknownUe)
{
    TransitNode5G node;
    EXPECT_EQ(code_of([&] { transit_contract(node, "UE9", Direction::Uplink, 100, 100); }),
              ErrorCode::UnknownUe);
}

TEST(Sustained, NeverBelowBurstFormula)
{
    std::mt19937_64 rng(99);
    const std::vector<std::string> patterns{"DDDSU", "DU", "UUUUU", "DDDDDDDSUU", "DSUUD"};
    for (int i = 0; i < 500; ++i) {
        auto t = tdd(patterns[rng() % patterns.size()], static_cast<int>(rng() % 3),
                     static_cast<int>(rng() % 3));
        const Bytes tbs = 200 + static_cast<Bytes>(rng() % 2000);
        const Bytes burst = 1 + static_cast<Bytes>(rng() % 8000);
        const auto cap = static_cast<BytesPerSec>(capacity(t, Direction::Uplink, tbs));
        const BytesPerSec rate = 1 + static_cast<BytesPerSec>(rng() % static_cast<std::uint64_t>(cap));
        EXPECT_GE(sustained_latency_bound_ns(t, Direction::Uplink, tbs, burst, rate),
                  worst_case_latency_ns(t, Direction::Uplink, tbs, burst, rate));
    }
}

TEST(Properties, MonotoneAndPeriodic)
{
    std::mt19937_64 rng(1);
    const std::string letters = "DUS";
    for (int i = 0; i < 300; ++i) {
        std::string p;
        const auto len = 1 + rng() % 12;
        for (std::size_t k = 0; k < len; ++k)
            p += letters[rng() % 3];
        p += 'U';
        const Bytes tbs = 100 + static_cast<Bytes>(rng() % 1000);
        const Bytes burst = 1 + static_cast<Bytes>(rng() % 4000);
        const auto base = worst_case_latency_ns(tdd(p), Direction::Uplink, tbs, burst, 1);
        EXPECT_LE(base, worst_case_latency_ns(tdd(p), Direction::Uplink, tbs, burst + tbs, 1));
        EXPECT_LE(base, worst_case_latency_ns(tdd(p, 1, 2), Direction::Uplink, tbs, burst, 1));
        const std::string rotated = p.substr(1) + p.front();
        EXPECT_EQ(base, worst_case_latency_ns(tdd(rotated), Direction::Uplink, tbs, burst, 1));
    }
}

TEST(Oracle, ShortPatternsExhaustive)
{
    // Every pattern up to length 6; the acceptance binary goes further.
    const std::string letters = "DUS";
    for (std::size_t len = 1; len <= 6; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i)
            total *= 3;
        for (std::size_t code = 0; code < total; ++code) {
            std::string p;
            for (std::size_t i = 0, c = code; i < len; ++i, c /= 3)
                p += letters[c % 3];
            for (int g : {0, 2})
                for (bool up : {true, false})
                    for (int n = 1; n <= 8; ++n) {
                        const auto t = tdd(p, 1, g);
                        const auto d = up ? Direction::Uplink : Direction::Downlink;
                        const auto want = oracle::tdd_worst_latency_ns(model(t), up, 1000, n * 1000);
                        if (!want) {
                            EXPECT_THROW(worst_case_latency_ns(t, d, 1000, n * 1000, 1), Error);
                            continue;
                        }
                        EXPECT_EQ(worst_case_latency_ns(t, d, 1000, n * 1000, 1).count(), *want)
                            << p << " g=" << g << " n=" << n;
                        if (n == 1) {
                            EXPECT_EQ(best_case_latency_ns(t, d).count(),
                                      *oracle::tdd_best_latency_ns(model(t), up));
                        }
                    }
        }
    }
}
