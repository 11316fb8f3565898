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

#include <benchmark/benchmark.h>

using namespace detnet5g;

static void BM_HopDelayBound(benchmark::State& state)
{
    PortClassState port(8);
    port.link_rate_Bps = 125'000;
    port.buffer_B = 64'000;
    for (int c = 1; c < 8; ++c)
        port.classes[static_cast<std::size_t>(c)] = {1000 * c, 1000 * c, 500, {}};
    for (auto _ : state) {
        for (int c = 1; c < 8; ++c)
            benchmark::DoNotOptimize(hop_delay_bound(port, c));
    }
    state.SetItemsProcessed(state.iterations() * 7);
}
BENCHMARK(BM_HopDelayBound);
