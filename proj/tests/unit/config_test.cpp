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

#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "mitocount/config.hpp"
#include "mitocount/error.hpp"
#include "oracles.hpp"

namespace mitocount {
namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = env_of({});

TEST(PipelineConfigParse, Defaults) {
  const auto c = parse_pipeline_config("", kNoEnv);
  EXPECT_EQ(c.mode, RunMode::kWall);
  EXPECT_EQ(c.inference_workers, 1);
  EXPECT_EQ(c.download_queue, 8u);
  EXPECT_EQ(c.detector.id, "blob");
  EXPECT_EQ(c.processing.binarize_threshold, 0.5);
  EXPECT_EQ(c.processing.post.min_width_um, 3.0);
  EXPECT_EQ(c.processing.post.max_interpolar_um, 15.0);
  EXPECT_EQ(c.processing.tiles.min_coverage, 0.05);
}

TEST(PipelineConfigParse, AllSections) {
  const auto c = parse_pipeline_config(R"(
[pipeline]
mode = virtual
submit_policy = reject
gate = passthrough

[workers]
download = 2
inference = 4
postprocess = 3

[queues]
inference = 1

[detector]
id = noise
seed = 11
specks = 2

[postprocess]
min_width_um = 2.5
global_merge = false
connectivity = 4

[tissue]
blur = false

[service]
jitter = 0

[fault]
crash_job = 3
crash_stage = postprocess
)",
                                       kNoEnv);
  EXPECT_EQ(c.mode, RunMode::kVirtual);
  EXPECT_EQ(c.submit_policy, SubmitPolicy::kReject);
  EXPECT_EQ(c.gate, GateKind::kPassthrough);
  EXPECT_EQ(c.download_workers, 2);
  EXPECT_EQ(c.inference_workers, 4);
  EXPECT_EQ(c.postprocess_workers, 3);
  EXPECT_EQ(c.inference_queue, 1u);
  EXPECT_EQ(c.detector.id, "noise");
  EXPECT_EQ(c.detector.params.at("specks"), "2");
  EXPECT_EQ(c.processing.post.min_width_um, 2.5);
  EXPECT_FALSE(c.processing.global_merge);
  EXPECT_EQ(c.processing.post.connectivity, Connectivity::kFour);
  EXPECT_FALSE(c.processing.tissue_refine.blur);
  EXPECT_EQ(c.service.jitter, 0.0);
  EXPECT_EQ(c.fault.crash_job, 3);
  EXPECT_EQ(c.fault.crash_stage, Stage::kPostprocess);
}

TEST(PipelineConfigParse, EnvironmentOverrides) {
  const auto c = parse_pipeline_config("[workers]\ninference = 2\n",
                                       env_of({{"MITOCOUNT_WORKERS_INFERENCE", "6"},
                                               {"MITOCOUNT_PIPELINE_BUFFER_DIR", "/tmp/buf"}}));
  EXPECT_EQ(c.inference_workers, 6);
  ASSERT_TRUE(c.buffer_dir);
  EXPECT_EQ(*c.buffer_dir, "/tmp/buf");
}

TEST(PipelineConfigParse, Errors) {
  EXPECT_THROW((void)parse_pipeline_config("[workers]\ninferense = 2\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[workers]\ninference = 0\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[workers]\ninference = many\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[pipeline]\nmode = turbo\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[detector]\nid = resnet\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[postprocess]\nconnectivity = 6\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[bogus]\nx = 1\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("[detector]\nthreshold = 1.5\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_pipeline_config("", env_of({{"MITOCOUNT_QUEUES_DOWNLOAD", "0"}})), ConfigError);
  EXPECT_THROW((void)load_pipeline_config("/nonexistent/pipeline.ini", kNoEnv), IoError);
}

TEST(WorkloadParse, DefaultsAndSections) {
  const auto d = parse_workload("", kNoEnv);
  EXPECT_EQ(d.slides_per_day, 3323);
  EXPECT_EQ(d.count_ratio, 0.35);
  EXPECT_EQ(d.tiles_per_slide, 8164);
  EXPECT_EQ(d.batch_size, 16);

  const auto w = parse_workload(R"(
[workload]
slides = 100
arrival = burst
seed = 9
count_ratio = 1

[generate]
width_px = 2400
n_figures = 3
pair_gaps_um = 10, 20
)",
                                env_of({{"MITOCOUNT_WORKLOAD_SLIDES", "12"}}));
  EXPECT_EQ(w.slides, 12);
  EXPECT_EQ(w.arrival, ArrivalModel::kBurst);
  EXPECT_EQ(w.seed, 9u);
  EXPECT_EQ(w.generate.width_px, 2400);
  EXPECT_EQ(w.generate.n_figures, 3);
  EXPECT_EQ(w.generate.pair_gaps_um, (std::vector<double>{10, 20}));
}

TEST(WorkloadParse, Errors) {
  EXPECT_THROW((void)parse_workload("[workload]\ncount_ratio = 0\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_workload("[workload]\ncount_ratio = 1.5\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_workload("[workload]\nbatch_size = 17\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_workload("[workload]\narrival = trace\n", kNoEnv), ConfigError);
  EXPECT_THROW((void)parse_workload("[generate]\ncolour = red\n", kNoEnv), ConfigError);
}

TEST(WorkloadParse, LoadsFromFile) {
  testing::TempDir tmp;
  std::ofstream(tmp.path() / "w.ini") << "[workload]\nslides = 3\n";
  EXPECT_EQ(load_workload(tmp.path() / "w.ini", kNoEnv).slides, 3);
}

}  // namespace
}  // namespace mitocount
