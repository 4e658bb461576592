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

#include <thread>
#include <vector>

#include <benchmark/benchmark.h>

#include "mitocount/work_queue.hpp"

namespace mitocount {
namespace {

// One producer, range(1) consumers, items pushed through a queue of range(0) slots.
void BM_BoundedQueueThroughput(benchmark::State& state) {
  constexpr int kItems = 20000;
  const auto capacity = static_cast<std::size_t>(state.range(0));
  const int consumers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    BoundedQueue<int> q(capacity);
    std::vector<std::thread> pool;
    for (int c = 0; c < consumers; ++c) {
      pool.emplace_back([&q] {
        while (auto item = q.pop()) benchmark::DoNotOptimize(*item);
      });
    }
    for (int i = 0; i < kItems; ++i) q.push(int{i});
    q.close();
    for (auto& t : pool) t.join();
  }
  state.SetItemsProcessed(state.iterations() * kItems);
}
BENCHMARK(BM_BoundedQueueThroughput)->Args({1, 1})->Args({16, 1})->Args({16, 4})->Args({256, 4})->UseRealTime();

}  // namespace
}  // namespace mitocount
