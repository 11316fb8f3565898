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
#include "fabrics.hpp"

#include <benchmark/benchmark.h>

using namespace detnet5g;

namespace {

FlowSpec flow(int i)
{
    const bool forward = i % 2 == 0;
    return FlowSpec{"f" + std::to_string(i), forward ? "H1" : "H2", forward ? "H2" : "H1", 2'000,
                    1'000, 500, Micros{400'000}, false};
}

} // namespace

// Registers `n` flows one after another on a four-switch mesh.
static void BM_RegisterFlows(benchmark::State& state)
{
    const auto topo = bench::mesh(4);
    const int n = static_cast<int>(state.range(0));
    int accepted = 0;
    for (auto _ : state) {
        NetworkManager mgr(topo);
        accepted = 0;
        for (int i = 0; i < n; ++i)
            accepted += mgr.register_flow(flow(i)).accepted ? 1 : 0;
        benchmark::DoNotOptimize(accepted);
    }
    state.counters["accepted"] = accepted;
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RegisterFlows)->RangeMultiplier(2)->Range(4, 32)->Unit(benchmark::kMicrosecond);

static void BM_RegisterRemove(benchmark::State& state)
{
    const auto topo = bench::mesh(4);
    NetworkManager mgr(topo);
    for (int i = 0; i < 16; ++i)
        mgr.register_flow(flow(i));
    const auto extra = flow(1000);
    for (auto _ : state) {
        if (mgr.register_flow(extra).accepted)
            mgr.remove_flow(extra.flow_id);
    }
}
BENCHMARK(BM_RegisterRemove)->Unit(benchmark::kMicrosecond);
