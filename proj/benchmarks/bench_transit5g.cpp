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

#include <benchmark/benchmark.h>

using namespace detnet5g;

static void BM_WorstCaseUplink(benchmark::State& state)
{
    TddConfig tdd;
    tdd.pattern = std::string(static_cast<std::size_t>(state.range(0)) - 2, 'D') + "SU";
    tdd.numerology = 1;
    tdd.grant_delay_slots = 1;
    const UeRecord ue{"UE1", 1500, 1500, 16};
    for (auto _ : state)
        benchmark::DoNotOptimize(worst_case_ul_latency(tdd, ue, 12'000, 1000));
}
BENCHMARK(BM_WorstCaseUplink)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

static void BM_TransitContract(benchmark::State& state)
{
    TransitNode5G node;
    node.id = "5GS";
    node.tdd.pattern = "DDDSU";
    node.tdd.numerology = 1;
    node.ues.emplace("UE1", UeRecord{"UE1", 1500, 1500, 16});
    for (auto _ : state)
        benchmark::DoNotOptimize(transit_contract(node, "UE1", Direction::Uplink, 1250, 12'500));
}
BENCHMARK(BM_TransitContract);
