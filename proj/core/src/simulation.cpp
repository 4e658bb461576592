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

#include "mitocount/simulation.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <random>

namespace mitocount {
namespace {

enum class WorkerState { kIdle, kBusy, kBlocked };

struct SimWorker {
  WorkerState state = WorkerState::kIdle;
  std::size_t job = 0;
  double started = 0.0;
  double until = 0.0;
};

struct SimStage {
  std::size_t capacity = 1;
  std::deque<std::size_t> queue;
  std::vector<SimWorker> workers;
};

}  // namespace

std::vector<SimulatedJob> plan_simulated_jobs(const PipelineConfig& config, const WorkloadSpec& workload) {
  const auto arrivals = arrival_times(workload);
  const auto flags = count_flags(workload);
  const double ms_per_tile = make_detector(config.detector)->descriptor().nominal_ms_per_tile;
  const auto& svc = config.service;
  std::seed_seq seq{static_cast<std::uint32_t>(workload.seed), static_cast<std::uint32_t>(workload.seed >> 32),
                    0x5e41U};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> jitter(1.0 - svc.jitter, 1.0 + svc.jitter);

  std::vector<SimulatedJob> jobs(static_cast<std::size_t>(workload.slides));
  const auto batch = static_cast<std::size_t>(workload.batch_size);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& j = jobs[i];
    j.arrival_s = arrivals[i];
    j.count = flags[i];
    j.tiles = j.count ? static_cast<std::size_t>(workload.tiles_per_slide) : 0;
    j.batches = (j.tiles + batch - 1) / batch;
    const double inference_ms =
        j.count ? svc.gate_ms + svc.tissue_ms + static_cast<double>(j.batches) * svc.batch_overhead_ms +
                      static_cast<double>(j.tiles) * ms_per_tile
                : svc.gate_ms;
    const double post_ms = svc.postprocess_fixed_ms + static_cast<double>(j.tiles) * svc.postprocess_ms_per_tile;
    j.service_s[0] = svc.download_ms * jitter(rng) / 1000.0;
    j.service_s[1] = inference_ms * jitter(rng) / 1000.0;
    j.service_s[2] = j.count ? post_ms * jitter(rng) / 1000.0 : 0.0;
  }
  return jobs;
}

PipelineMetrics simulate_pipeline(const PipelineConfig& config, const WorkloadSpec& workload) {
  validate(config);
  validate(workload);
  const auto jobs = plan_simulated_jobs(config, workload);
  const std::array<int, 3> worker_counts{config.download_workers, config.inference_workers,
                                         config.postprocess_workers};
  const std::array<std::size_t, 3> capacities{config.download_queue, config.inference_queue,
                                              config.postprocess_queue};
  std::array<SimStage, 3> stages;
  PipelineMetrics m;
  m.mode = RunMode::kVirtual;
  for (std::size_t s = 0; s < 3; ++s) {
    stages[s].capacity = capacities[s];
    stages[s].workers.resize(static_cast<std::size_t>(worker_counts[s]));
    m.stages[s].stage = static_cast<Stage>(s);
    m.stages[s].workers = worker_counts[s];
    m.stages[s].queue_capacity = capacities[s];
  }

  std::vector<SlideMetrics> slides(jobs.size());
  std::vector<bool> accepted(jobs.size(), false);
  const auto crash_index = config.fault.crash_job;
  double now = 0.0;
  std::size_t next_arrival = 0;

  auto sample = [&](std::size_t s) {
    m.queue_depth.push_back({now, static_cast<Stage>(s), stages[s].queue.size()});
    m.stages[s].queue_high_water = std::max(m.stages[s].queue_high_water, stages[s].queue.size());
    if (stages[s].queue.size() > stages[s].capacity) throw std::logic_error("simulated queue exceeded capacity");
  };
  auto finish_job = [&](std::size_t j, JobStatus status, const char* reason) {
    slides[j].status = status;
    slides[j].finished_s = now;
    if (reason != nullptr) slides[j].reason = reason;
  };

  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      while (next_arrival < jobs.size() && jobs[next_arrival].arrival_s <= now) {
        const std::size_t j = next_arrival;
        if (stages[0].queue.size() < stages[0].capacity) {
          stages[0].queue.push_back(j);
          accepted[j] = true;
          slides[j].job_id = j + 1;
          slides[j].slide_id = "sim_" + std::to_string(j);
          slides[j].submitted_s = jobs[j].arrival_s;
          slides[j].tiles = jobs[j].tiles;
          slides[j].detector_calls = jobs[j].batches;
          sample(0);
        } else if (config.submit_policy == SubmitPolicy::kReject) {
          ++m.rejected;
        } else {
          break;  // the submitter blocks until the intake queue drains
        }
        ++next_arrival;
        changed = true;
      }
      for (std::size_t s = 3; s-- > 0;) {
        for (auto& w : stages[s].workers) {
          if (w.state == WorkerState::kBlocked && stages[s + 1].queue.size() < stages[s + 1].capacity) {
            stages[s + 1].queue.push_back(w.job);
            sample(s + 1);
            w.state = WorkerState::kIdle;
            changed = true;
          }
          if (w.state == WorkerState::kIdle && !stages[s].queue.empty()) {
            w.job = stages[s].queue.front();
            stages[s].queue.pop_front();
            sample(s);
            w.state = WorkerState::kBusy;
            w.started = now;
            w.until = now + jobs[w.job].service_s[s];
            changed = true;
          }
        }
      }
    }

    double next = std::numeric_limits<double>::infinity();
    for (const auto& st : stages) {
      for (const auto& w : st.workers) {
        if (w.state == WorkerState::kBusy) next = std::min(next, w.until);
      }
    }
    const bool intake_open =
        stages[0].queue.size() < stages[0].capacity || config.submit_policy == SubmitPolicy::kReject;
    if (next_arrival < jobs.size() && intake_open) next = std::min(next, jobs[next_arrival].arrival_s);
    if (!std::isfinite(next)) break;
    now = std::max(now, next);

    for (std::size_t s = 0; s < 3; ++s) {
      for (auto& w : stages[s].workers) {
        if (w.state != WorkerState::kBusy || w.until > now) continue;
        const std::size_t j = w.job;
        const double spent = w.until - w.started;
        m.stages[s].busy_s += spent;
        m.stages[s].jobs += 1;
        slides[j].stage_seconds[to_string(static_cast<Stage>(s))] = spent;
        w.state = WorkerState::kIdle;
        if (crash_index >= 0 && j == static_cast<std::size_t>(crash_index) &&
            config.fault.crash_stage == static_cast<Stage>(s)) {
          ++m.stages[s].restarts;
          finish_job(j, JobStatus::kFailed, "injected worker crash");
        } else if (s == 1 && !jobs[j].count) {
          finish_job(j, JobStatus::kGatedNoCount, nullptr);
        } else if (s == 2) {
          finish_job(j, JobStatus::kDone, nullptr);
        } else {
          w.state = WorkerState::kBlocked;
        }
      }
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!accepted[j]) continue;
    if (!is_terminal(slides[j].status)) throw std::logic_error("simulated job did not terminate");
    m.slides.push_back(slides[j]);
    m.makespan_s = std::max(m.makespan_s, slides[j].finished_s);
  }
  m.submitted = m.slides.size();
  for (auto& s : m.stages) {
    s.utilization = m.makespan_s > 0.0 ? s.busy_s / (s.workers * m.makespan_s) : 0.0;
  }
  return m;
}

}  // namespace mitocount
