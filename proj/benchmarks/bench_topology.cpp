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

#include "detnet5g/topology.hpp"
#include "fabrics.hpp"

#include <benchmark/benchmark.h>

using namespace detnet5g;

static void BM_EnumerateSpanningTrees(benchmark::State& state)
{
    const auto topo = bench::mesh(static_cast<int>(state.range(0)));
    std::size_t trees = 0;
    for (auto _ : state) {
        const auto st = enumerate_spanning_trees(topo, TreeOptions{4000, 1});
        trees = st.trees.size();
        benchmark::DoNotOptimize(trees);
    }
    state.counters["trees"] = static_cast<double>(trees);
}
BENCHMARK(BM_EnumerateSpanningTrees)->DenseRange(3, 6);

static void BM_PathInTree(benchmark::State& state)
{
    const auto topo = bench::mesh(6);
    const auto st = enumerate_spanning_trees(topo, TreeOptions{64, 100});
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& tree = st.trees[i++ % st.trees.size()];
        benchmark::DoNotOptimize(path_in_tree(topo, tree, "H1", "H2"));
    }
}
BENCHMARK(BM_PathInTree);
