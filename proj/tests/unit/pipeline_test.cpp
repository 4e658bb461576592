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

#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "mitocount/annotation_xml.hpp"
#include "mitocount/hpf_search.hpp"
#include "mitocount/pipeline.hpp"
#include "oracles.hpp"

namespace mitocount {
namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("mitocount-pipeline");
    auto make = [](const std::string& id, int figures, int specks, double tissue, std::uint64_t seed) {
      SyntheticSpec s;
      s.slide_id = id;
      s.width_px = 2400;
      s.height_px = 1800;
      s.n_figures = figures;
      s.n_specks = specks;
      s.tissue_fraction = tissue;
      s.seed = seed;
      gen_synthetic_slide(s, dir_->path() / "src" / id);
    };
    make("five", 5, 0, 0.6, 1);
    make("speck", 5, 1, 0.6, 2);
    make("empty", 0, 0, 0.6, 3);
    make("blank", 0, 0, 0.0, 4);
    for (int i = 0; i < 6; ++i) make("multi_" + std::to_string(i), 2 + i, 0, 0.6, 10 + i);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static fs::path slide(const std::string& id) { return dir_->path() / "src" / id; }

  static PipelineConfig passthrough_config() {
    PipelineConfig c;
    c.detector.id = "passthrough";
    c.gate = GateKind::kPassthrough;
    return c;
  }

  fs::path out(const std::string& name) const { return dir_->path() / "out" / (name + "_" + std::to_string(counter_++)); }

  static PipelineMetrics run(const PipelineConfig& c, const fs::path& out_dir, const std::vector<std::string>& ids) {
    Pipeline p(c, out_dir);
    for (const auto& id : ids) p.submit(slide(id));
    return p.finish();
  }

  static const SlideMetrics& by_slide(const PipelineMetrics& m, const std::string& id) {
    for (const auto& s : m.slides)
      if (s.slide_id == id) return s;
    throw std::runtime_error("no slide " + id);
  }

  static testing::TempDir* dir_;
  mutable int counter_ = 0;
};

testing::TempDir* PipelineTest::dir_ = nullptr;

TEST(JobStatus, Transitions) {
  EXPECT_TRUE(transition_allowed(JobStatus::kQueued, JobStatus::kDownloading));
  EXPECT_TRUE(transition_allowed(JobStatus::kInferring, JobStatus::kGatedNoCount));
  EXPECT_TRUE(transition_allowed(JobStatus::kDownloading, JobStatus::kFailed));
  EXPECT_FALSE(transition_allowed(JobStatus::kQueued, JobStatus::kInferring));
  EXPECT_FALSE(transition_allowed(JobStatus::kDone, JobStatus::kFailed));
  EXPECT_FALSE(transition_allowed(JobStatus::kPostProcessing, JobStatus::kGatedNoCount));
  EXPECT_TRUE(is_terminal(JobStatus::kGatedNoCount));
  EXPECT_FALSE(is_terminal(JobStatus::kPostProcessing));
  PipelineJob job;
  job.transition(JobStatus::kDownloading, 0.1);
  EXPECT_THROW(job.transition(JobStatus::kDone, 0.2), std::logic_error);
  EXPECT_EQ(job.history.size(), 1u);
}

TEST_F(PipelineTest, FiveFiguresEndToEnd) {
  const auto dir = out("five");
  const auto m = run(passthrough_config(), dir, {"five"});
  ASSERT_EQ(m.slides.size(), 1u);
  const auto& s = m.slides[0];
  EXPECT_EQ(s.status, JobStatus::kDone);
  EXPECT_EQ(s.mf_total, 5);
  EXPECT_GT(s.tiles, 0u);
  EXPECT_EQ(s.detector_calls, (s.tiles + 15) / 16);

  const auto doc = read_annotation_xml(dir / "annotations" / "five.xml");
  ASSERT_EQ(doc.figures.size(), 5u);
  std::vector<Point2> centers;
  for (const auto& f : doc.figures) centers.push_back({f.x, f.y});
  const auto oracle = brute_force_best_hpf(centers, hpf_geometry(MicronsPerPixel(doc.mpp)));
  ASSERT_TRUE(doc.hpf);
  EXPECT_EQ(static_cast<std::size_t>(doc.hpf->count), oracle.count);
  EXPECT_EQ(s.hpf_count, static_cast<int>(oracle.count));

  const auto records = ResultStore(dir / "results.jsonl").scan();
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].mf_total, 5);
  EXPECT_FALSE(fs::exists(dir / "buffer" / "1"));
}

TEST_F(PipelineTest, EveryTileProducesAMask) {
  const auto loaded = load_slide(slide("five"));
  const PassthroughDetector det;
  const auto out = infer_slide(loaded, PassthroughGate{}, det, {});
  EXPECT_EQ(out.masks.size(), out.grid.tiles.size());
  EXPECT_EQ(det.invocations(), (out.grid.tiles.size() + 15) / 16);
  EXPECT_EQ(out.detector_calls, det.invocations());
  for (std::size_t i = 0; i < out.masks.size(); ++i) EXPECT_EQ(out.masks[i].offset, out.grid.tiles[i]);

  SlideProcessingOptions small_batches;
  small_batches.batch_size = 5;
  const PassthroughDetector det5;
  const auto out5 = infer_slide(loaded, PassthroughGate{}, det5, small_batches);
  EXPECT_EQ(det5.invocations(), (out.grid.tiles.size() + 4) / 5);
  for (std::size_t i = 0; i < out.masks.size(); ++i) EXPECT_EQ(out5.masks[i].mask, out.masks[i].mask);
}

TEST_F(PipelineTest, NoFiguresGivesEmptyAnnotation) {
  const auto dir = out("empty");
  const auto m = run(passthrough_config(), dir, {"empty"});
  const auto& s = m.slides.at(0);
  EXPECT_EQ(s.status, JobStatus::kDone);
  EXPECT_EQ(s.mf_total, 0);
  const auto doc = read_annotation_xml(dir / "annotations" / "empty.xml");
  EXPECT_TRUE(doc.figures.empty());
  EXPECT_FALSE(doc.hpf);
}

TEST_F(PipelineTest, SpeckIsNotCounted) {
  const auto m = run(passthrough_config(), out("speck"), {"speck"});
  EXPECT_EQ(m.slides.at(0).mf_total, 5);
}

TEST_F(PipelineTest, BlankSlideIsGatedWithoutDetectorCalls) {
  for (auto gate : {GateKind::kHeuristic, GateKind::kPassthrough}) {
    auto c = passthrough_config();
    c.gate = gate;
    const auto dir = out("blank");
    Pipeline p(c, dir);
    p.submit(slide("blank"));
    const auto m = p.finish();
    EXPECT_EQ(p.detector().invocations(), 0u);
    const auto& s = m.slides.at(0);
    EXPECT_EQ(s.status, JobStatus::kGatedNoCount);
    EXPECT_EQ(s.detector_calls, 0u);
    EXPECT_FALSE(s.mf_total);
    const auto records = p.results().scan();
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].status, SlideStatus::kNoCount);
    EXPECT_FALSE(records[0].mf_total);
    EXPECT_FALSE(fs::exists(dir / "annotations" / "blank.xml"));
  }
}

TEST_F(PipelineTest, MissingSlideFailsAndOthersContinue) {
  const auto dir = out("missing");
  Pipeline p(passthrough_config(), dir);
  const auto a = p.submit(slide("five"));
  const auto b = p.submit(dir_->path() / "does_not_exist");
  const auto m = p.finish();
  EXPECT_NE(a, b);
  ASSERT_EQ(m.slides.size(), 2u);
  EXPECT_EQ(m.slides[0].status, JobStatus::kDone);
  EXPECT_EQ(m.slides[1].status, JobStatus::kFailed);
  EXPECT_NE(m.slides[1].reason.find("not found"), std::string::npos);
  EXPECT_EQ(p.results().scan().size(), 2u);
}

TEST_F(PipelineTest, TenJobsTwoDownloadWorkersExactlyOnce) {
  auto c = passthrough_config();
  c.download_workers = 2;
  c.inference_workers = 2;
  c.download_queue = 2;
  c.inference_queue = 1;
  c.postprocess_queue = 1;
  const auto dir = out("ten");
  Pipeline p(c, dir);
  std::set<std::uint64_t> ids;
  const std::vector<std::string> names{"five", "speck", "empty", "blank", "multi_0", "multi_1",
                                       "multi_2", "multi_3", "multi_4", "multi_5"};
  for (const auto& n : names) ids.insert(p.submit(slide(n)));
  EXPECT_EQ(ids.size(), 10u);
  const auto m = p.finish();
  ASSERT_EQ(m.slides.size(), 10u);
  std::set<std::uint64_t> done;
  for (const auto& s : m.slides) {
    EXPECT_TRUE(is_terminal(s.status));
    EXPECT_NE(s.status, JobStatus::kFailed) << s.reason;
    done.insert(s.job_id);
  }
  EXPECT_EQ(done, ids);
  EXPECT_EQ(m.count(JobStatus::kGatedNoCount), 1u);
  EXPECT_EQ(p.results().scan().size(), 10u);
  EXPECT_LE(m.stages[0].queue_high_water, 2u);
  EXPECT_LE(m.stages[1].queue_high_water, 1u);
  for (const auto& q : m.queue_depth) {
    EXPECT_LE(q.depth, q.stage == Stage::kDownload ? 2u : 1u);
  }
  EXPECT_EQ(m.submitted, 10u);
}

TEST_F(PipelineTest, RejectPolicySignalsBackpressure) {
  auto c = passthrough_config();
  c.submit_policy = SubmitPolicy::kReject;
  c.download_queue = 1;
  c.download_latency_ms = 1500;
  Pipeline p(c, out("reject"));
  p.submit(slide("empty"));
  std::this_thread::sleep_for(300ms);  // the single download worker takes it and stalls
  p.submit(slide("empty"));
  EXPECT_THROW(p.submit(slide("empty")), BackpressureError);
  const auto m = p.finish();
  EXPECT_EQ(m.rejected, 1u);
  EXPECT_EQ(m.submitted, 2u);
  EXPECT_EQ(m.slides.size(), 2u);
}

TEST_F(PipelineTest, ResultsDoNotDependOnWorkerCounts) {
  const std::vector<std::string> names{"five", "speck", "multi_0", "multi_1", "multi_2", "multi_3", "multi_4", "multi_5"};
  std::map<std::string, std::pair<std::optional<int>, std::optional<int>>> baseline;
  for (int workers : {1, 4}) {
    auto c = passthrough_config();
    c.detector.id = "blob";
    c.gate = GateKind::kHeuristic;
    c.inference_workers = workers;
    c.postprocess_workers = workers;
    const auto m = run(c, out("det"), names);
    ASSERT_EQ(m.slides.size(), names.size());
    for (const auto& s : m.slides) {
      ASSERT_EQ(s.status, JobStatus::kDone) << s.reason;
      if (workers == 1) {
        baseline[s.slide_id] = {s.mf_total, s.hpf_count};
      } else {
        EXPECT_EQ(baseline.at(s.slide_id), std::make_pair(s.mf_total, s.hpf_count)) << s.slide_id;
      }
    }
  }
  EXPECT_EQ(baseline.at("five").first, 5);
}

TEST_F(PipelineTest, InjectedCrashIsIsolated) {
  for (auto stage : {Stage::kDownload, Stage::kInference, Stage::kPostprocess}) {
    auto c = passthrough_config();
    c.fault.crash_job = 1;
    c.fault.crash_stage = stage;
    const auto m = run(c, out("crash"), {"multi_0", "multi_1", "multi_2", "multi_3"});
    ASSERT_EQ(m.slides.size(), 4u);
    EXPECT_EQ(m.count(JobStatus::kFailed), 1u);
    EXPECT_EQ(m.count(JobStatus::kDone), 3u);
    EXPECT_EQ(m.slides[1].status, JobStatus::kFailed);
    EXPECT_EQ(m.stages[static_cast<std::size_t>(stage)].restarts, 1);
    EXPECT_EQ(m.slides[3].mf_total, 5);
  }
}

TEST_F(PipelineTest, MetricsFiles) {
  const auto dir = out("metrics");
  const auto m = run(passthrough_config(), dir, {"five", "blank"});
  write_metrics(m, dir / "metrics");
  for (const char* f : {"slides.csv", "stages.csv", "queue_depth.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "metrics" / f)) << f;
  }
  const auto text = summarize(m);
  EXPECT_NE(text.find("no-count: 1"), std::string::npos) << text;
  EXPECT_NE(text.find("done: 1"), std::string::npos) << text;
  EXPECT_GT(m.throughput_per_hour(), 0.0);
  EXPECT_LE(m.min_latency_s(), m.avg_latency_s());
  EXPECT_LE(m.avg_latency_s(), m.max_latency_s());
}

TEST_F(PipelineTest, RunPipelineWallModeFromSourceDir) {
  testing::TempDir src("mitocount-src");
  for (const char* n : {"five", "blank", "empty"}) fs::copy(slide(n), src.path() / n, fs::copy_options::recursive);
  WorkloadSpec w;
  w.slides = 5;
  w.arrival = ArrivalModel::kBurst;
  w.source_dir = src.path();
  const auto dir = out("run");
  const auto m = run_pipeline(passthrough_config(), w, dir);
  EXPECT_EQ(m.slides.size(), 5u);
  EXPECT_EQ(m.count(JobStatus::kGatedNoCount), 2u);  // blank, blank (sorted + cycled)
  EXPECT_TRUE(fs::exists(dir / "metrics" / "summary.txt"));
}

}  // namespace
}  // namespace mitocount
