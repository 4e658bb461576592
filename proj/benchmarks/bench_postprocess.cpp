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

#include "mitocount/components.hpp"
#include "mitocount/morphology.hpp"
#include "mitocount/postprocess.hpp"

namespace mitocount {
namespace {

// Sparse round blobs, roughly what a detector emits on one tile.
BinaryMask blob_tile(int side, int blobs) {
  std::mt19937_64 rng(static_cast<unsigned>(side * 131 + blobs));
  std::uniform_int_distribution<int> pos(10, side - 11);
  BinaryMask m(side, side, 0);
  for (int b = 0; b < blobs; ++b) {
    const int cx = pos(rng), cy = pos(rng);
    for (int y = cy - 8; y <= cy + 8; ++y) {
      for (int x = cx - 8; x <= cx + 8; ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= 64) m(x, y) = 1;
      }
    }
  }
  return m;
}

void BM_LabelInstances(benchmark::State& state) {
  const auto mask = blob_tile(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(label_instances(mask));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mask.size()));
}
BENCHMARK(BM_LabelInstances)->Arg(600)->Arg(1200);

void BM_Dilate(benchmark::State& state) {
  const auto mask = blob_tile(600, 20);
  for (auto _ : state) benchmark::DoNotOptimize(morph::dilate(mask, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Dilate)->Arg(1)->Arg(8)->Arg(24);

void BM_ProcessTileMask(benchmark::State& state) {
  const auto mask = blob_tile(600, static_cast<int>(state.range(0)));
  const MicronsPerPixel mpp(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(process_tile_mask(mask, {}, mpp));
}
BENCHMARK(BM_ProcessTileMask)->Arg(0)->Arg(5)->Arg(40);

void BM_MergeGlobal(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 20000.0);
  std::vector<Point2> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(rng), u(rng)};
  const MicronsPerPixel mpp(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(merge_global(pts, mpp));
}
BENCHMARK(BM_MergeGlobal)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace mitocount
