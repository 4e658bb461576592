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

#pragma once

#include "mitocount/config.hpp"
#include "mitocount/pipeline.hpp"

namespace mitocount {

/// Per-job service times in seconds, drawn up front so that they do not
/// depend on worker counts or scheduling.
struct SimulatedJob {
  double arrival_s = 0.0;
  bool count = true;
  std::size_t tiles = 0;
  std::size_t batches = 0;
  std::array<double, 3> service_s{};
};

[[nodiscard]] std::vector<SimulatedJob> plan_simulated_jobs(const PipelineConfig& config,
                                                            const WorkloadSpec& workload);

/// Discrete-event, virtual-time run of the pipeline topology: the same worker
/// pools and bounded queues, with blocking hand-off when a downstream queue is
/// full. Deterministic for a given config and workload.
[[nodiscard]] PipelineMetrics simulate_pipeline(const PipelineConfig& config, const WorkloadSpec& workload);

}  // namespace mitocount
