// Copyright 2026 The mitocount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mitocount/hpf_search.hpp"

namespace mitocount {
namespace {

// Figures spread over a 20 mm square at 0.25 um/px.
std::vector<Point2> scatter(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(0.0, 80000.0);
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

void BM_HpfColumnBands(benchmark::State& state) {
  const auto pts = scatter(static_cast<std::size_t>(state.range(0)));
  const auto geom = hpf_geometry(MicronsPerPixel(0.25));
  for (auto _ : state) benchmark::DoNotOptimize(find_best_hpf(pts, geom, HpfStrategy::kColumnBands));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HpfColumnBands)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_HpfPerCandidate(benchmark::State& state) {
  const auto pts = scatter(static_cast<std::size_t>(state.range(0)));
  const auto geom = hpf_geometry(MicronsPerPixel(0.25));
  for (auto _ : state) benchmark::DoNotOptimize(find_best_hpf(pts, geom, HpfStrategy::kPerCandidate));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HpfPerCandidate)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_HpfBruteForce(benchmark::State& state) {
  const auto pts = scatter(static_cast<std::size_t>(state.range(0)));
  const auto geom = hpf_geometry(MicronsPerPixel(0.25));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_best_hpf(pts, geom));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HpfBruteForce)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

}  // namespace
}  // namespace mitocount
