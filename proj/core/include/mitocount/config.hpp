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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "mitocount/detector.hpp"
#include "mitocount/slide_processing.hpp"
#include "mitocount/synthetic.hpp"

namespace mitocount {

enum class RunMode { kWall, kVirtual };
enum class SubmitPolicy { kBlock, kReject };
enum class GateKind { kHeuristic, kPassthrough };
enum class Stage { kDownload, kInference, kPostprocess };

[[nodiscard]] const char* to_string(Stage stage) noexcept;

/// Service-time model for virtual-time runs, in milliseconds. Inference time
/// per tile comes from the detector descriptor.
struct ServiceTimes {
  double download_ms = 1500.0;
  double gate_ms = 40.0;
  double tissue_ms = 150.0;
  double batch_overhead_ms = 4.0;
  double postprocess_ms_per_tile = 0.4;
  double postprocess_fixed_ms = 200.0;
  /// Each draw is scaled by a seeded uniform factor in [1 - jitter, 1 + jitter].
  double jitter = 0.1;
};

struct FaultInjection {
  /// Submission index (0-based) whose processing crashes its worker; -1 = none.
  int crash_job = -1;
  Stage crash_stage = Stage::kInference;
};

struct PipelineConfig {
  RunMode mode = RunMode::kWall;
  SubmitPolicy submit_policy = SubmitPolicy::kBlock;
  GateKind gate = GateKind::kHeuristic;
  int download_workers = 1;
  int inference_workers = 1;
  int postprocess_workers = 1;
  std::size_t download_queue = 8;
  std::size_t inference_queue = 4;
  std::size_t postprocess_queue = 4;
  DetectorConfig detector{};
  SlideProcessingOptions processing{};
  double download_latency_ms = 0.0;
  ServiceTimes service{};
  FaultInjection fault{};
  /// Defaults to <out>/buffer.
  std::optional<std::filesystem::path> buffer_dir;
};

enum class ArrivalModel { kPoisson, kBurst, kTrace };

struct WorkloadSpec {
  int slides_per_day = 3323;
  double count_ratio = 0.35;
  int tiles_per_slide = 8164;
  int batch_size = 16;
  ArrivalModel arrival = ArrivalModel::kPoisson;
  /// One arrival offset in seconds per line (arrival = trace).
  std::optional<std::filesystem::path> trace_file;
  /// Wall mode compresses Poisson/trace gaps by this factor.
  double time_scale = 1000.0;
  std::uint64_t seed = 1;
  int slides = 10;
  /// Existing slide directories (each with manifest.json), used in sorted order.
  std::optional<std::filesystem::path> source_dir;
  /// Template for on-the-fly slides; counts are zeroed for no-count slides.
  SyntheticSpec generate{};
};

/// Throws ConfigError.
void validate(const PipelineConfig& config);
void validate(const WorkloadSpec& workload);

/// Reads `name` from the environment; tests may substitute a lookup.
using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;
[[nodiscard]] EnvLookup process_environment();

/// INI-style `key = value` files. Every key can be overridden by the
/// environment variable MITOCOUNT_<SECTION>_<KEY> (upper-case).
[[nodiscard]] PipelineConfig parse_pipeline_config(const std::string& text,
                                                   const EnvLookup& env = process_environment());
[[nodiscard]] WorkloadSpec parse_workload(const std::string& text, const EnvLookup& env = process_environment());
[[nodiscard]] PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                                  const EnvLookup& env = process_environment());
[[nodiscard]] WorkloadSpec load_workload(const std::filesystem::path& path,
                                         const EnvLookup& env = process_environment());

}  // namespace mitocount
