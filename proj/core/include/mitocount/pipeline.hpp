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

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mitocount/config.hpp"
#include "mitocount/result_store.hpp"
#include "mitocount/slide_processing.hpp"
#include "mitocount/work_queue.hpp"

namespace mitocount {

enum class JobStatus { kQueued, kDownloading, kInferring, kPostProcessing, kDone, kGatedNoCount, kFailed };

[[nodiscard]] const char* to_string(JobStatus status) noexcept;
[[nodiscard]] bool is_terminal(JobStatus status) noexcept;
/// Forward along Queued -> Downloading -> Inferring -> PostProcessing -> Done,
/// Inferring -> Gated-NoCount, or any non-terminal state -> Failed.
[[nodiscard]] bool transition_allowed(JobStatus from, JobStatus to) noexcept;

struct PipelineJob {
  std::uint64_t job_id = 0;
  /// 0-based submission order (job_id - 1), including rejected submissions.
  std::size_t submit_index = 0;
  std::filesystem::path source;
  std::string slide_id;  // known after download
  JobStatus status = JobStatus::kQueued;
  /// (status, seconds since pipeline start) for every transition.
  std::vector<std::pair<JobStatus, double>> history;
  std::size_t tiles_total = 0;
  std::size_t tiles_done = 0;
  std::size_t detector_calls = 0;
  std::map<std::string, double> stage_seconds;
  std::string reason;
  std::optional<int> mf_total;
  std::optional<int> hpf_count;

  std::optional<LoadedSlide> slide;
  std::optional<InferenceOutput> inference;

  /// Throws std::logic_error for a transition outside the stage order.
  void transition(JobStatus to, double at_seconds);
};

class BackpressureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SlideMetrics {
  std::uint64_t job_id = 0;
  std::string slide_id;
  JobStatus status = JobStatus::kQueued;
  double submitted_s = 0.0;
  double finished_s = 0.0;
  std::size_t tiles = 0;
  std::size_t detector_calls = 0;
  std::optional<int> mf_total;
  std::optional<int> hpf_count;
  std::map<std::string, double> stage_seconds;
  std::string reason;

  [[nodiscard]] double latency_s() const noexcept { return finished_s - submitted_s; }
};

struct StageMetrics {
  Stage stage = Stage::kDownload;
  int workers = 0;
  std::uint64_t jobs = 0;
  double busy_s = 0.0;
  double utilization = 0.0;  // busy / (workers * makespan)
  std::size_t queue_capacity = 0;
  std::size_t queue_high_water = 0;
  int restarts = 0;
};

struct QueueSample {
  double t = 0.0;
  Stage stage = Stage::kDownload;
  std::size_t depth = 0;
};

struct PipelineMetrics {
  RunMode mode = RunMode::kWall;
  /// Terminal jobs ordered by job id.
  std::vector<SlideMetrics> slides;
  std::array<StageMetrics, 3> stages{};
  std::vector<QueueSample> queue_depth;
  double makespan_s = 0.0;
  std::size_t submitted = 0;
  std::size_t rejected = 0;

  [[nodiscard]] std::size_t count(JobStatus status) const noexcept;
  /// Terminal jobs per hour of makespan.
  [[nodiscard]] double throughput_per_hour() const noexcept;
  [[nodiscard]] double min_latency_s() const noexcept;
  [[nodiscard]] double avg_latency_s() const noexcept;
  [[nodiscard]] double max_latency_s() const noexcept;
};

/// slides.csv, stages.csv, queue_depth.csv and summary.txt under `dir`.
void write_metrics(const PipelineMetrics& metrics, const std::filesystem::path& dir);
[[nodiscard]] std::string summarize(const PipelineMetrics& metrics);

/// Wall-clock engine: download, inference and post-processing pools joined by
/// bounded queues. Results go to <out>/results.jsonl and
/// <out>/annotations/<slide_id>.xml.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out_dir, std::size_t batch_size = kMaxBatchSize);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  /// Enqueues a slide directory. Under the reject policy a full queue throws
  /// BackpressureError; under block the call waits for space.
  std::uint64_t submit(const std::filesystem::path& slide_dir);

  /// Stops intake, drains every stage and joins the workers.
  PipelineMetrics finish();

  [[nodiscard]] const Detector& detector() const noexcept { return *detector_; }
  [[nodiscard]] const ResultStore& results() const noexcept { return store_; }

 private:
  using JobPtr = std::unique_ptr<PipelineJob>;

  [[nodiscard]] double now() const;
  void download_loop(int worker);
  void inference_loop(int worker);
  void postprocess_loop(int worker);
  void maybe_crash(const PipelineJob& job, Stage stage) const;
  void fail(JobPtr job, const std::string& reason);
  void complete(JobPtr job);
  void record_sample(Stage stage, std::size_t depth);
  void add_busy(Stage stage, double seconds);

  PipelineConfig config_;
  std::filesystem::path out_dir_;
  std::filesystem::path buffer_dir_;
  std::filesystem::path annotation_dir_;
  std::shared_ptr<Detector> detector_;
  std::unique_ptr<SlideGate> gate_;
  ResultStore store_;
  std::chrono::steady_clock::time_point start_;

  BoundedQueue<JobPtr> download_q_;
  BoundedQueue<JobPtr> inference_q_;
  BoundedQueue<JobPtr> postprocess_q_;

  std::vector<std::thread> download_workers_;
  std::vector<std::thread> inference_workers_;
  std::vector<std::thread> postprocess_workers_;

  std::atomic<std::uint64_t> next_job_id_{1};
  std::atomic<std::size_t> rejected_{0};
  bool finished_ = false;

  mutable std::mutex sink_mutex_;
  std::set<std::uint64_t> terminal_ids_;
  std::vector<SlideMetrics> slides_;
  std::array<StageMetrics, 3> stages_{};
  std::vector<QueueSample> samples_;
};

/// Slide directories for a wall-clock workload: `source_dir` entries (cycled
/// when fewer than `slides`), or slides generated under <out>/source.
[[nodiscard]] std::vector<std::filesystem::path> prepare_workload_slides(const WorkloadSpec& workload,
                                                                         const std::filesystem::path& out_dir);

/// Arrival offsets in seconds, non-decreasing, one per slide.
[[nodiscard]] std::vector<double> arrival_times(const WorkloadSpec& workload);
/// Whether slide i is a count slide, drawn with probability count_ratio.
[[nodiscard]] std::vector<bool> count_flags(const WorkloadSpec& workload);

/// Runs the workload in the configured mode; writes metrics under `out_dir`.
PipelineMetrics run_pipeline(const PipelineConfig& config, const WorkloadSpec& workload,
                             const std::filesystem::path& out_dir);

}  // namespace mitocount
