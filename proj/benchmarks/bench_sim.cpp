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
#include "detnet5g/scenario.hpp"
#include "detnet5g/sim.hpp"

#include <benchmark/benchmark.h>

using namespace detnet5g;

static void BM_RunCanonical(benchmark::State& state)
{
    const auto scenario = load_scenario_file(std::string(DETNET5G_BENCH_DATA_DIR) + "/canonical.json");
    const RunOptions opts{.seed = 7, .background = state.range(0) != 0};
    std::uint64_t packets = 0;
    for (auto _ : state) {
        const auto r = run_scenario(scenario, opts);
        packets = r.trace.size();
        benchmark::DoNotOptimize(packets);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(packets));
}
BENCHMARK(BM_RunCanonical)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_RegulatorThroughput(benchmark::State& state)
{
    RegulatorConfig cfg;
    cfg.hold = Micros{3000};
    cfg.release_period = Micros{100};
    cfg.queue_cap_pkts = 1 << 20;
    for (auto _ : state) {
        Regulator reg(cfg);
        Nanos t{0};
        std::size_t out = 0;
        for (Regulator::Handle h = 0; h < 1000; ++h) {
            t += Nanos{50'000};
            out += reg.release(t).size();
            reg.offer(h, t);
        }
        out += reg.release(t + Nanos{1'000'000'000}).size();
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RegulatorThroughput);
