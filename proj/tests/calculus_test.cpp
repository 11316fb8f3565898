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

#include "detnet5g/calculus.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace detnet5g;

namespace {

// Port with one class above `cls` holding (b_h, r_h) and class `cls`
// holding (b_p, r_p).
PortClassState port(Bytes b_h, BytesPerSec r_h, Bytes b_p, BytesPerSec r_p, Bytes l_max)
{
    PortClassState s(8);
    s.link_rate_Bps = 125'000;
    s.buffer_B = 64'000;
    s.l_max_floor_B = l_max;
    s.classes[7] = {b_h, r_h, 0, {}};
    s.classes[6] = {b_p, r_p, 0, {}};
    return s;
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

} // namespace

TEST(Residual, EmptyHigherSet)
{
    const auto rl = sp_residual_service(port(0, 0, 0, 0, 0), 6);
    EXPECT_EQ(rl.rate_Bps, 125'000);
    EXPECT_EQ(rl.latency, Micros{0});
}

TEST(Residual, HigherClassAndBlocking)
{
    const auto rl = sp_residual_service(port(1250, 62'500, 0, 0, 1500), 6);
    EXPECT_EQ(rl.rate_Bps, 62'500);
    EXPECT_EQ(rl.latency, Micros{44'000});
}

TEST(Residual, SaturatedIsUnschedulable)
{
    EXPECT_EQ(code_of([] { sp_residual_service(port(100, 125'000, 0, 0, 0), 6); }),
              ErrorCode::Unschedulable);
}

TEST(HopBound, WithHigherClass)
{
    EXPECT_EQ(hop_delay_bound(port(1250, 62'500, 1250, 12'500, 1500), 6), Micros{64'000});
}

TEST(HopBound, SingleFlowIsSerialization)
{
    PortClassState s(8);
    s.link_rate_Bps = 125'000;
    s.l_max_floor_B = 0;
    s.classes[7] = {1250, 12'500, 0, {}};
    EXPECT_EQ(hop_delay_bound(s, 7), Micros{10'000});
    s.fwd_delay[7] = Micros{500};
    EXPECT_EQ(hop_delay_bound(s, 7), Micros{10'500});
}

TEST(HopBound, RateOverload)
{
    EXPECT_EQ(code_of([] { hop_delay_bound(port(0, 62'500, 100, 70'000, 0), 6); }),
              ErrorCode::RateOverload);
}

TEST(HopBound, RoundsUp)
{
    // 1 byte at 3 B/s is 333 333.3 us.
    PortClassState s(2);
    s.link_rate_Bps = 3;
    s.l_max_floor_B = 0;
    s.classes[1] = {1, 1, 0, {}};
    EXPECT_EQ(hop_delay_bound(s, 1), Micros{333'334});
}

TEST(HopBound, LowerClassPacketBlocks)
{
    PortClassState s(8);
    s.link_rate_Bps = 125'000;
    s.l_max_floor_B = 0;
    s.classes[7] = {1250, 12'500, 100, {}};
    s.classes[2] = {3000, 10'000, 1000, {}};
    EXPECT_EQ(s.l_max(7), 1000);
    EXPECT_EQ(hop_delay_bound(s, 7), Micros{18'000});
}

TEST(Backlog, Examples)
{
    EXPECT_EQ(backlog_bound(port(0, 0, 700, 12'500, 0), 6), 700);
    EXPECT_EQ(backlog_bound(port(1250, 62'500, 1250, 12'500, 1500), 6), 1800);
}

TEST(Burst, Propagation)
{
    EXPECT_EQ(propagate_burst({1250, 12'500}, Micros{0}), (TokenBucket{1250, 12'500}));
    EXPECT_EQ(propagate_burst({1250, 12'500}, Micros{64'000}), (TokenBucket{2050, 12'500}));
}

TEST(Burst, MonotoneInDelay)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> d(0, 1'000'000);
    for (int i = 0; i < 1000; ++i) {
        const TokenBucket tb{d(rng) + 1, d(rng) + 1};
        const Micros a{d(rng)};
        const Micros b{d(rng)};
        const auto pa = propagate_burst(tb, std::min(a, b));
        const auto pb = propagate_burst(tb, std::max(a, b));
        EXPECT_LE(pa.burst_B, pb.burst_B);
        EXPECT_GE(pa.burst_B, tb.burst_B);
    }
}

TEST(E2e, Composition)
{
    EXPECT_EQ(e2e_delay({}, Micros{0}, Micros{0}), Micros{0});
    const std::vector<Micros> hops{Micros{22'000}, Micros{24'200}};
    EXPECT_EQ(e2e_delay(hops, Micros{3'000}, Micros{0}), Micros{49'200});
}

TEST(HopBound, MonotoneInInputs)
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> bytes(0, 5000);
    std::uniform_int_distribution<std::int64_t> rate(0, 40'000);
    for (int i = 0; i < 1000; ++i) {
        const Bytes bh = bytes(rng), bp = bytes(rng) + 1, lm = bytes(rng);
        const BytesPerSec rh = rate(rng), rp = rate(rng) + 1;
        const auto base = hop_delay_bound(port(bh, rh, bp, rp, lm), 6);
        EXPECT_LE(base, hop_delay_bound(port(bh + 100, rh, bp, rp, lm), 6));
        EXPECT_LE(base, hop_delay_bound(port(bh, rh + 1000, bp, rp, lm), 6));
        EXPECT_LE(base, hop_delay_bound(port(bh, rh, bp + 100, rp, lm), 6));
        EXPECT_LE(base, hop_delay_bound(port(bh, rh, bp, rp, lm + 100), 6));
        auto faster = port(bh, rh, bp, rp, lm);
        faster.link_rate_Bps *= 2;
        EXPECT_GE(base, hop_delay_bound(faster, 6));
    }
}
