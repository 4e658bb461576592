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

#include "mitocount/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "mitocount/error.hpp"
#include "mitocount/simulation.hpp"

namespace mitocount {
namespace {

namespace fs = std::filesystem;

struct WorkerCrash : std::runtime_error {
  WorkerCrash() : std::runtime_error("injected worker crash") {}
};

std::size_t stage_index(Stage s) { return static_cast<std::size_t>(s); }

std::string csv_optional(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const char* to_string(JobStatus status) noexcept {
  switch (status) {
    case JobStatus::kQueued:
      return "queued";
    case JobStatus::kDownloading:
      return "downloading";
    case JobStatus::kInferring:
      return "inferring";
    case JobStatus::kPostProcessing:
      return "post-processing";
    case JobStatus::kDone:
      return "done";
    case JobStatus::kGatedNoCount:
      return "gated-no-count";
    case JobStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

bool is_terminal(JobStatus status) noexcept {
  return status == JobStatus::kDone || status == JobStatus::kGatedNoCount || status == JobStatus::kFailed;
}

bool transition_allowed(JobStatus from, JobStatus to) noexcept {
  if (is_terminal(from)) return false;
  if (to == JobStatus::kFailed) return true;
  switch (from) {
    case JobStatus::kQueued:
      return to == JobStatus::kDownloading;
    case JobStatus::kDownloading:
      return to == JobStatus::kInferring;
    case JobStatus::kInferring:
      return to == JobStatus::kPostProcessing || to == JobStatus::kGatedNoCount;
    case JobStatus::kPostProcessing:
      return to == JobStatus::kDone;
    default:
      return false;
  }
}

void PipelineJob::transition(JobStatus to, double at_seconds) {
  if (!transition_allowed(status, to)) {
    throw std::logic_error(std::string("job ") + std::to_string(job_id) + ": illegal transition " +
                           to_string(status) + " -> " + to_string(to));
  }
  status = to;
  history.emplace_back(to, at_seconds);
}

std::size_t PipelineMetrics::count(JobStatus status) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(slides.begin(), slides.end(), [&](const SlideMetrics& s) { return s.status == status; }));
}

double PipelineMetrics::throughput_per_hour() const noexcept {
  return makespan_s > 0.0 ? static_cast<double>(slides.size()) * 3600.0 / makespan_s : 0.0;
}

double PipelineMetrics::min_latency_s() const noexcept {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& s : slides) v = std::min(v, s.latency_s());
  return slides.empty() ? 0.0 : v;
}

double PipelineMetrics::avg_latency_s() const noexcept {
  double sum = 0.0;
  for (const auto& s : slides) sum += s.latency_s();
  return slides.empty() ? 0.0 : sum / static_cast<double>(slides.size());
}

double PipelineMetrics::max_latency_s() const noexcept {
  double v = 0.0;
  for (const auto& s : slides) v = std::max(v, s.latency_s());
  return v;
}

void write_metrics(const PipelineMetrics& m, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << std::setprecision(9);
    return out;
  };
  {
    auto out = open("slides.csv");
    out << "job_id,slide_id,status,submitted_s,finished_s,latency_s,tiles,detector_calls,mf_total,hpf_count,"
           "download_s,inference_s,postprocess_s,reason\n";
    for (const auto& s : m.slides) {
      auto stage = [&](const char* k) {
        auto it = s.stage_seconds.find(k);
        return it == s.stage_seconds.end() ? 0.0 : it->second;
      };
      out << s.job_id << ',' << csv_escape(s.slide_id) << ',' << to_string(s.status) << ',' << s.submitted_s << ','
          << s.finished_s << ',' << s.latency_s() << ',' << s.tiles << ',' << s.detector_calls << ','
          << csv_optional(s.mf_total) << ',' << csv_optional(s.hpf_count) << ',' << stage("download") << ','
          << stage("inference") << ',' << stage("postprocess") << ',' << csv_escape(s.reason) << '\n';
    }
  }
  {
    auto out = open("stages.csv");
    out << "stage,workers,jobs,busy_s,utilization,queue_capacity,queue_high_water,restarts\n";
    for (const auto& s : m.stages) {
      out << to_string(s.stage) << ',' << s.workers << ',' << s.jobs << ',' << s.busy_s << ',' << s.utilization << ','
          << s.queue_capacity << ',' << s.queue_high_water << ',' << s.restarts << '\n';
    }
  }
  {
    auto out = open("queue_depth.csv");
    out << "t_s,stage,depth\n";
    for (const auto& q : m.queue_depth) out << q.t << ',' << to_string(q.stage) << ',' << q.depth << '\n';
  }
  auto out = open("summary.txt");
  out << summarize(m);
}

std::string summarize(const PipelineMetrics& m) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "mode: " << (m.mode == RunMode::kWall ? "wall" : "virtual") << '\n';
  out << "submitted: " << m.submitted << "  rejected: " << m.rejected << '\n';
  out << "done: " << m.count(JobStatus::kDone) << "  no-count: " << m.count(JobStatus::kGatedNoCount)
      << "  failed: " << m.count(JobStatus::kFailed) << '\n';
  out << "makespan_s: " << m.makespan_s << "  throughput_per_hour: " << m.throughput_per_hour() << '\n';
  out << "latency_s min/avg/max: " << m.min_latency_s() << " / " << m.avg_latency_s() << " / " << m.max_latency_s()
      << '\n';
  for (const auto& s : m.stages) {
    out << "stage " << to_string(s.stage) << ": workers=" << s.workers << " jobs=" << s.jobs
        << " utilization=" << s.utilization << " queue_high_water=" << s.queue_high_water << '/'
        << s.queue_capacity << " restarts=" << s.restarts << '\n';
  }
  return out.str();
}

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir, std::size_t batch_size)
    : config_(std::move(config)),
      out_dir_(std::move(out_dir)),
      buffer_dir_(config_.buffer_dir.value_or(out_dir_ / "buffer")),
      annotation_dir_(out_dir_ / "annotations"),
      detector_(make_detector(config_.detector)),
      store_(out_dir_ / "results.jsonl"),
      start_(std::chrono::steady_clock::now()),
      download_q_(config_.download_queue, [this](std::size_t d) { record_sample(Stage::kDownload, d); }),
      inference_q_(config_.inference_queue, [this](std::size_t d) { record_sample(Stage::kInference, d); }),
      postprocess_q_(config_.postprocess_queue, [this](std::size_t d) { record_sample(Stage::kPostprocess, d); }) {
  config_.processing.batch_size = batch_size;
  validate(config_);
  if (config_.gate == GateKind::kPassthrough) {
    gate_ = std::make_unique<PassthroughGate>();
  } else {
    gate_ = std::make_unique<HeuristicGate>();
  }
  if (!detector_->descriptor().concurrent) config_.inference_workers = 1;
  fs::create_directories(buffer_dir_);
  fs::create_directories(annotation_dir_);

  const std::array<std::pair<int, const WorkQueue<JobPtr>*>, 3> shape{
      {{config_.download_workers, &download_q_},
       {config_.inference_workers, &inference_q_},
       {config_.postprocess_workers, &postprocess_q_}}};
  for (std::size_t s = 0; s < 3; ++s) {
    stages_[s].stage = static_cast<Stage>(s);
    stages_[s].workers = shape[s].first;
    stages_[s].queue_capacity = shape[s].second->capacity();
  }
  for (int i = 0; i < config_.download_workers; ++i) download_workers_.emplace_back([this, i] { download_loop(i); });
  for (int i = 0; i < config_.inference_workers; ++i) inference_workers_.emplace_back([this, i] { inference_loop(i); });
  for (int i = 0; i < config_.postprocess_workers; ++i) {
    postprocess_workers_.emplace_back([this, i] { postprocess_loop(i); });
  }
}

Pipeline::~Pipeline() {
  if (!finished_) {
    try {
      (void)finish();
    } catch (...) {
    }
  }
}

double Pipeline::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void Pipeline::record_sample(Stage stage, std::size_t depth) {
  const double t = now();
  std::lock_guard lock(sink_mutex_);
  samples_.push_back({t, stage, depth});
}

void Pipeline::add_busy(Stage stage, double seconds) {
  std::lock_guard lock(sink_mutex_);
  stages_[stage_index(stage)].busy_s += seconds;
  stages_[stage_index(stage)].jobs += 1;
}

std::uint64_t Pipeline::submit(const fs::path& slide_dir) {
  if (finished_) throw std::logic_error("pipeline already finished");
  auto job = std::make_unique<PipelineJob>();
  job->job_id = next_job_id_.fetch_add(1);
  job->submit_index = static_cast<std::size_t>(job->job_id - 1);
  job->source = slide_dir;
  job->slide_id = slide_dir.filename().string();
  job->history.emplace_back(JobStatus::kQueued, now());
  const std::uint64_t id = job->job_id;
  if (config_.submit_policy == SubmitPolicy::kReject) {
    const PushResult r = download_q_.try_push(std::move(job));
    if (r == PushResult::kFull) {
      rejected_.fetch_add(1);
      throw BackpressureError("download queue full; retry later");
    }
    if (r == PushResult::kClosed) throw std::logic_error("pipeline intake closed");
  } else if (!download_q_.push(std::move(job))) {
    throw std::logic_error("pipeline intake closed");
  }
  return id;
}

void Pipeline::maybe_crash(const PipelineJob& job, Stage stage) const {
  if (config_.fault.crash_job >= 0 && job.submit_index == static_cast<std::size_t>(config_.fault.crash_job) &&
      config_.fault.crash_stage == stage) {
    throw WorkerCrash();
  }
}

void Pipeline::fail(JobPtr job, const std::string& reason) {
  job->reason = reason;
  job->inference.reset();
  job->transition(JobStatus::kFailed, now());
  ResultRecord r;
  r.slide_id = job->slide_id.empty() ? job->source.filename().string() : job->slide_id;
  if (r.slide_id.empty()) r.slide_id = "job-" + std::to_string(job->job_id);
  r.status = SlideStatus::kFailed;
  r.timings = job->stage_seconds;
  r.reason = reason;
  try {
    store_.append(r);
  } catch (const std::exception& e) {
    job->reason += std::string("; result store: ") + e.what();
  }
  complete(std::move(job));
}

void Pipeline::complete(JobPtr job) {
  SlideMetrics s;
  s.job_id = job->job_id;
  s.slide_id = job->slide_id;
  s.status = job->status;
  s.submitted_s = job->history.front().second;
  s.finished_s = job->history.back().second;
  s.tiles = job->tiles_total;
  s.detector_calls = job->detector_calls;
  s.stage_seconds = job->stage_seconds;
  s.reason = job->reason;
  s.mf_total = job->mf_total;
  s.hpf_count = job->hpf_count;
  std::lock_guard lock(sink_mutex_);
  if (!is_terminal(s.status)) throw std::logic_error("completing a non-terminal job");
  if (!terminal_ids_.insert(s.job_id).second) {
    throw std::logic_error("job " + std::to_string(s.job_id) + " reached a terminal state twice");
  }
  slides_.push_back(std::move(s));
}

void Pipeline::download_loop(int) {
  while (auto popped = download_q_.pop()) {
    JobPtr job = std::move(*popped);
    const double t0 = now();
    job->transition(JobStatus::kDownloading, t0);
    try {
      maybe_crash(*job, Stage::kDownload);
      if (config_.download_latency_ms > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(config_.download_latency_ms));
      }
      if (!fs::exists(job->source / "manifest.json")) {
        throw IoError("slide not found: " + job->source.string());
      }
      const fs::path local = buffer_dir_ / std::to_string(job->job_id);
      fs::remove_all(local);
      fs::copy(job->source, local, fs::copy_options::recursive);
      job->slide = load_slide(local);
      job->slide_id = job->slide->manifest.slide_id;
      job->stage_seconds["download"] = now() - t0;
      add_busy(Stage::kDownload, now() - t0);
      if (!inference_q_.push(std::move(job))) throw std::logic_error("inference queue closed early");
    } catch (const WorkerCrash& e) {
      {
        std::lock_guard lock(sink_mutex_);
        ++stages_[stage_index(Stage::kDownload)].restarts;
      }
      fail(std::move(job), e.what());
    } catch (const std::exception& e) {
      fail(std::move(job), e.what());
    }
  }
}

void Pipeline::inference_loop(int) {
  while (auto popped = inference_q_.pop()) {
    JobPtr job = std::move(*popped);
    const double t0 = now();
    job->transition(JobStatus::kInferring, t0);
    try {
      maybe_crash(*job, Stage::kInference);
      InferenceOutput out = infer_slide(*job->slide, *gate_, *detector_, config_.processing);
      job->detector_calls = out.detector_calls;
      job->tiles_total = out.grid.tiles.size();
      job->tiles_done = out.masks.size();
      job->stage_seconds["inference"] = now() - t0;
      add_busy(Stage::kInference, now() - t0);
      if (out.gate.label == GateLabel::kNoCount) {
        ResultRecord r;
        r.slide_id = job->slide_id;
        r.status = SlideStatus::kNoCount;
        r.timings = job->stage_seconds;
        store_.append(r);
        std::error_code ignored;
        fs::remove_all(job->slide->dir, ignored);
        job->transition(JobStatus::kGatedNoCount, now());
        complete(std::move(job));
        continue;
      }
      job->inference = std::move(out);
      if (!postprocess_q_.push(std::move(job))) throw std::logic_error("post-processing queue closed early");
    } catch (const WorkerCrash& e) {
      {
        std::lock_guard lock(sink_mutex_);
        ++stages_[stage_index(Stage::kInference)].restarts;
      }
      fail(std::move(job), e.what());
    } catch (const std::exception& e) {
      fail(std::move(job), e.what());
    }
  }
}

void Pipeline::postprocess_loop(int) {
  while (auto popped = postprocess_q_.pop()) {
    JobPtr job = std::move(*popped);
    const double t0 = now();
    job->transition(JobStatus::kPostProcessing, t0);
    try {
      maybe_crash(*job, Stage::kPostprocess);
      const auto& m = job->slide->manifest;
      const SlideAnalysis analysis =
          analyze_masks(job->inference->masks, m.slide_id, m.microns_per_pixel(), config_.processing);
      write_annotation_xml(analysis.annotation, annotation_dir_ / (m.slide_id + ".xml"));
      job->stage_seconds["postprocess"] = now() - t0;
      add_busy(Stage::kPostprocess, now() - t0);
      ResultRecord r;
      r.slide_id = m.slide_id;
      r.status = SlideStatus::kCounted;
      r.mf_total = static_cast<int>(analysis.figures.size());
      r.hpf_count = static_cast<int>(analysis.hpf.count);
      r.timings = job->stage_seconds;
      store_.append(r);
      job->inference.reset();
      std::error_code ignored;
      fs::remove_all(job->slide->dir, ignored);
      job->transition(JobStatus::kDone, now());
      job->mf_total = r.mf_total;
      job->hpf_count = r.hpf_count;
      complete(std::move(job));
    } catch (const WorkerCrash& e) {
      {
        std::lock_guard lock(sink_mutex_);
        ++stages_[stage_index(Stage::kPostprocess)].restarts;
      }
      fail(std::move(job), e.what());
    } catch (const std::exception& e) {
      fail(std::move(job), e.what());
    }
  }
}

PipelineMetrics Pipeline::finish() {
  if (finished_) throw std::logic_error("pipeline already finished");
  finished_ = true;
  download_q_.close();
  for (auto& t : download_workers_) t.join();
  inference_q_.close();
  for (auto& t : inference_workers_) t.join();
  postprocess_q_.close();
  for (auto& t : postprocess_workers_) t.join();

  PipelineMetrics m;
  m.mode = RunMode::kWall;
  std::lock_guard lock(sink_mutex_);
  m.slides = slides_;
  std::sort(m.slides.begin(), m.slides.end(),
            [](const SlideMetrics& a, const SlideMetrics& b) { return a.job_id < b.job_id; });
  m.queue_depth = samples_;
  m.stages = stages_;
  m.stages[0].queue_high_water = download_q_.high_water();
  m.stages[1].queue_high_water = inference_q_.high_water();
  m.stages[2].queue_high_water = postprocess_q_.high_water();
  for (const auto& s : m.slides) m.makespan_s = std::max(m.makespan_s, s.finished_s);
  for (auto& s : m.stages) {
    s.utilization = m.makespan_s > 0.0 ? s.busy_s / (s.workers * m.makespan_s) : 0.0;
  }
  m.submitted = next_job_id_.load() - 1 - rejected_.load();
  m.rejected = rejected_.load();
  return m;
}

std::vector<double> arrival_times(const WorkloadSpec& w) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w.slides));
  switch (w.arrival) {
    case ArrivalModel::kBurst:
      out.assign(static_cast<std::size_t>(w.slides), 0.0);
      break;
    case ArrivalModel::kPoisson: {
      std::seed_seq seq{static_cast<std::uint32_t>(w.seed), static_cast<std::uint32_t>(w.seed >> 32), 0xa771U};
      std::mt19937_64 rng(seq);
      std::exponential_distribution<double> gap(static_cast<double>(w.slides_per_day) / 86400.0);
      double t = 0.0;
      for (int i = 0; i < w.slides; ++i) {
        out.push_back(t);
        t += gap(rng);
      }
      break;
    }
    case ArrivalModel::kTrace: {
      std::ifstream in(*w.trace_file);
      if (!in) throw IoError("cannot open arrival trace " + w.trace_file->string());
      std::string line;
      while (static_cast<int>(out.size()) < w.slides && std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        double t = 0.0;
        try {
          t = std::stod(line);
        } catch (const std::exception&) {
          throw ParseError("arrival trace: '" + line + "' is not a number");
        }
        if (!(t >= 0.0) || (!out.empty() && t < out.back())) {
          throw ParseError("arrival trace must be non-negative and non-decreasing");
        }
        out.push_back(t);
      }
      if (static_cast<int>(out.size()) < w.slides) throw ParseError("arrival trace has fewer entries than slides");
      break;
    }
  }
  return out;
}

std::vector<bool> count_flags(const WorkloadSpec& w) {
  std::seed_seq seq{static_cast<std::uint32_t>(w.seed), static_cast<std::uint32_t>(w.seed >> 32), 0xc0c0U};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution coin(w.count_ratio);
  std::vector<bool> out;
  out.reserve(static_cast<std::size_t>(w.slides));
  for (int i = 0; i < w.slides; ++i) out.push_back(coin(rng));
  return out;
}

std::vector<fs::path> prepare_workload_slides(const WorkloadSpec& w, const fs::path& out_dir) {
  std::vector<fs::path> out;
  if (w.source_dir) {
    std::vector<fs::path> available;
    if (!fs::is_directory(*w.source_dir)) throw IoError("source_dir is not a directory: " + w.source_dir->string());
    for (const auto& entry : fs::directory_iterator(*w.source_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) available.push_back(entry.path());
    }
    std::sort(available.begin(), available.end());
    if (available.empty()) throw IoError("no slides under " + w.source_dir->string());
    for (int i = 0; i < w.slides; ++i) out.push_back(available[static_cast<std::size_t>(i) % available.size()]);
    return out;
  }
  const auto flags = count_flags(w);
  for (int i = 0; i < w.slides; ++i) {
    SyntheticSpec s = w.generate;
    std::ostringstream id;
    id << "slide_" << std::setw(4) << std::setfill('0') << i;
    s.slide_id = id.str();
    s.seed = w.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    if (!flags[static_cast<std::size_t>(i)]) {
      s.tissue_fraction = 0.0;
      s.n_figures = s.n_specks = s.n_pairs = 0;
      s.gate = GateLabel::kNoCount;
    }
    const fs::path dir = out_dir / "source" / s.slide_id;
    (void)gen_synthetic_slide(s, dir);
    out.push_back(dir);
  }
  return out;
}

PipelineMetrics run_pipeline(const PipelineConfig& config, const WorkloadSpec& workload, const fs::path& out_dir) {
  validate(config);
  validate(workload);
  PipelineMetrics metrics;
  if (config.mode == RunMode::kVirtual) {
    metrics = simulate_pipeline(config, workload);
  } else {
    const auto slides = prepare_workload_slides(workload, out_dir);
    const auto arrivals = arrival_times(workload);
    Pipeline pipeline(config, out_dir, static_cast<std::size_t>(workload.batch_size));
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < slides.size(); ++i) {
      const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(arrivals[i] / workload.time_scale));
      std::this_thread::sleep_until(due);
      try {
        (void)pipeline.submit(slides[i]);
      } catch (const BackpressureError&) {
        // Counted by the pipeline; the slide is dropped as a rejected request.
      }
    }
    metrics = pipeline.finish();
  }
  write_metrics(metrics, out_dir / "metrics");
  return metrics;
}

}  // namespace mitocount
