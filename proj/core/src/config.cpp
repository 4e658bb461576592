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

#include "mitocount/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mitocount/error.hpp"

namespace mitocount {
namespace {

namespace pt = boost::property_tree;

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

class Reader {
 public:
  Reader(const std::string& text, const EnvLookup& env) : env_(env) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    used_.insert(section + "/" + key);
    if (env_) {
      if (auto v = env_("MITOCOUNT_" + upper(section) + "_" + upper(key))) return trim(*v);
    }
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    if (v) return trim(*v);
    return std::nullopt;
  }

  template <typename T>
  T get(const std::string& section, const std::string& key, T fallback) {
    auto v = raw(section, key);
    if (!v) return fallback;
    return convert<T>(*v, section + "." + key);
  }

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
    return raw(section, key).value_or(fallback);
  }

  /// Keys of a free-form section not already consumed.
  std::vector<std::pair<std::string, std::string>> remaining(const std::string& section) {
    std::vector<std::pair<std::string, std::string>> out;
    if (auto child = tree_.get_child_optional(pt::ptree::path_type(section, '/'))) {
      for (const auto& [key, value] : *child) {
        if (used_.contains(section + "/" + key)) continue;
        used_.insert(section + "/" + key);
        out.emplace_back(key, trim(value.data()));
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, child] : tree_) {
      if (child.empty() && !child.data().empty()) throw ConfigError("config: key '" + section + "' must live inside a [section]");
      for (const auto& [key, value] : child) {
        if (!used_.contains(section + "/" + key)) {
          throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
        }
      }
    }
  }

 private:
  template <typename T>
  static T convert(const std::string& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
      if (v == "false" || v == "0" || v == "no" || v == "off") return false;
      throw ConfigError("config: " + where + " expects a boolean, got '" + v + "'");
    } else if constexpr (std::is_arithmetic_v<T>) {
      T out{};
      const char* end = v.data() + v.size();
      auto [ptr, ec] = std::from_chars(v.data(), end, out);
      if (ec != std::errc() || ptr != end || v.empty()) {
        throw ConfigError("config: " + where + " expects a number, got '" + v + "'");
      }
      if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) throw ConfigError("config: " + where + " must be finite");
      }
      return out;
    } else {
      return T(v);
    }
  }

  pt::ptree tree_;
  const EnvLookup& env_;
  std::set<std::string> used_;
};

template <typename E>
E choose(const std::string& value, const std::string& where, std::initializer_list<std::pair<const char*, E>> options) {
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError("config: " + where + " must be one of " + allowed + ", got '" + value + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw ConfigError("config: " + where + " expects comma-separated numbers, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::kDownload:
      return "download";
    case Stage::kInference:
      return "inference";
    case Stage::kPostprocess:
      return "postprocess";
  }
  return "unknown";
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

void validate(const PipelineConfig& c) {
  if (c.download_workers < 1 || c.inference_workers < 1 || c.postprocess_workers < 1) {
    throw ConfigError("config: every stage needs at least one worker");
  }
  if (c.download_queue < 1 || c.inference_queue < 1 || c.postprocess_queue < 1) {
    throw ConfigError("config: queue capacities must be >= 1");
  }
  if (!(c.download_latency_ms >= 0.0)) throw ConfigError("config: download latency must be >= 0");
  const auto& s = c.service;
  for (double v : {s.download_ms, s.gate_ms, s.tissue_ms, s.batch_overhead_ms, s.postprocess_ms_per_tile,
                   s.postprocess_fixed_ms}) {
    if (!(v >= 0.0)) throw ConfigError("config: service times must be >= 0");
  }
  if (!(s.jitter >= 0.0 && s.jitter < 1.0)) throw ConfigError("config: service jitter must lie in [0, 1)");
  if (c.fault.crash_job < -1) throw ConfigError("config: fault.crash_job must be >= -1");
  validate(c.processing);
  (void)make_detector(c.detector);
}

void validate(const WorkloadSpec& w) {
  if (w.slides_per_day <= 0 || w.tiles_per_slide <= 0 || w.slides <= 0) {
    throw ConfigError("workload: slides_per_day, tiles_per_slide and slides must be positive");
  }
  if (!(w.count_ratio > 0.0 && w.count_ratio <= 1.0)) throw ConfigError("workload: count_ratio must lie in (0, 1]");
  if (w.batch_size < 1 || w.batch_size > static_cast<int>(kMaxBatchSize)) {
    throw ConfigError("workload: batch_size must lie in [1, 16]");
  }
  if (!(w.time_scale > 0.0)) throw ConfigError("workload: time_scale must be positive");
  if (w.arrival == ArrivalModel::kTrace && !w.trace_file) throw ConfigError("workload: arrival=trace needs trace_file");
  if (!w.source_dir) validate(w.generate);
}

PipelineConfig parse_pipeline_config(const std::string& text, const EnvLookup& env) {
  Reader r(text, env);
  PipelineConfig c;
  c.mode = choose(r.text("pipeline", "mode", "wall"), "pipeline.mode",
                  {std::pair{"wall", RunMode::kWall}, std::pair{"virtual", RunMode::kVirtual}});
  c.submit_policy = choose(r.text("pipeline", "submit_policy", "block"), "pipeline.submit_policy",
                           {std::pair{"block", SubmitPolicy::kBlock}, std::pair{"reject", SubmitPolicy::kReject}});
  c.gate = choose(r.text("pipeline", "gate", "heuristic"), "pipeline.gate",
                  {std::pair{"heuristic", GateKind::kHeuristic}, std::pair{"passthrough", GateKind::kPassthrough}});
  if (auto dir = r.raw("pipeline", "buffer_dir")) c.buffer_dir = *dir;

  c.download_workers = r.get("workers", "download", c.download_workers);
  c.inference_workers = r.get("workers", "inference", c.inference_workers);
  c.postprocess_workers = r.get("workers", "postprocess", c.postprocess_workers);
  c.download_queue = r.get("queues", "download", c.download_queue);
  c.inference_queue = r.get("queues", "inference", c.inference_queue);
  c.postprocess_queue = r.get("queues", "postprocess", c.postprocess_queue);

  c.detector.id = r.text("detector", "id", c.detector.id);
  c.processing.binarize_threshold = r.get("detector", "threshold", c.processing.binarize_threshold);
  for (auto& [key, value] : r.remaining("detector")) c.detector.params[key] = value;

  auto& post = c.processing.post;
  post.min_width_um = r.get("postprocess", "min_width_um", post.min_width_um);
  post.max_interpolar_um = r.get("postprocess", "max_interpolar_um", post.max_interpolar_um);
  post.local_merge = r.get("postprocess", "local_merge", post.local_merge);
  c.processing.global_merge = r.get("postprocess", "global_merge", c.processing.global_merge);
  try {
    post.connectivity = connectivity_from_int(r.get("postprocess", "connectivity", static_cast<int>(post.connectivity)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: postprocess.") + e.what());
  }

  c.processing.tiles.min_coverage = r.get("tissue", "min_coverage", c.processing.tiles.min_coverage);
  c.processing.tissue_refine.close_iterations =
      r.get("tissue", "close_iterations", c.processing.tissue_refine.close_iterations);
  c.processing.tissue_refine.blur = r.get("tissue", "blur", c.processing.tissue_refine.blur);

  c.download_latency_ms = r.get("download", "latency_ms", c.download_latency_ms);

  auto& s = c.service;
  s.download_ms = r.get("service", "download_ms", s.download_ms);
  s.gate_ms = r.get("service", "gate_ms", s.gate_ms);
  s.tissue_ms = r.get("service", "tissue_ms", s.tissue_ms);
  s.batch_overhead_ms = r.get("service", "batch_overhead_ms", s.batch_overhead_ms);
  s.postprocess_ms_per_tile = r.get("service", "postprocess_ms_per_tile", s.postprocess_ms_per_tile);
  s.postprocess_fixed_ms = r.get("service", "postprocess_fixed_ms", s.postprocess_fixed_ms);
  s.jitter = r.get("service", "jitter", s.jitter);

  c.fault.crash_job = r.get("fault", "crash_job", c.fault.crash_job);
  c.fault.crash_stage = choose(r.text("fault", "crash_stage", "inference"), "fault.crash_stage",
                               {std::pair{"download", Stage::kDownload}, std::pair{"inference", Stage::kInference},
                                std::pair{"postprocess", Stage::kPostprocess}});
  r.reject_unknown();
  validate(c);
  return c;
}

WorkloadSpec parse_workload(const std::string& text, const EnvLookup& env) {
  Reader r(text, env);
  WorkloadSpec w;
  w.slides_per_day = r.get("workload", "slides_per_day", w.slides_per_day);
  w.count_ratio = r.get("workload", "count_ratio", w.count_ratio);
  w.tiles_per_slide = r.get("workload", "tiles_per_slide", w.tiles_per_slide);
  w.batch_size = r.get("workload", "batch_size", w.batch_size);
  w.arrival = choose(r.text("workload", "arrival", "poisson"), "workload.arrival",
                     {std::pair{"poisson", ArrivalModel::kPoisson}, std::pair{"burst", ArrivalModel::kBurst},
                      std::pair{"trace", ArrivalModel::kTrace}});
  if (auto v = r.raw("workload", "trace_file")) w.trace_file = *v;
  w.time_scale = r.get("workload", "time_scale", w.time_scale);
  w.seed = r.get("workload", "seed", w.seed);
  w.slides = r.get("workload", "slides", w.slides);
  if (auto v = r.raw("workload", "source_dir")) w.source_dir = *v;

  auto& g = w.generate;
  g.width_px = r.get("generate", "width_px", g.width_px);
  g.height_px = r.get("generate", "height_px", g.height_px);
  g.mpp = r.get("generate", "mpp", g.mpp);
  g.n_figures = r.get("generate", "n_figures", g.n_figures);
  g.n_specks = r.get("generate", "n_specks", g.n_specks);
  g.n_pairs = r.get("generate", "n_pairs", g.n_pairs);
  if (auto v = r.raw("generate", "pair_gaps_um")) g.pair_gaps_um = parse_list(*v, "generate.pair_gaps_um");
  g.tissue_fraction = r.get("generate", "tissue_fraction", g.tissue_fraction);
  g.min_separation_um = r.get("generate", "min_separation_um", g.min_separation_um);
  g.tile_px = r.get("generate", "tile_px", g.tile_px);
  g.overview_downsample = r.get("generate", "overview_downsample", g.overview_downsample);
  r.reject_unknown();
  validate(w);
  return w;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const EnvLookup& env) {
  return parse_pipeline_config(read_file(path), env);
}

WorkloadSpec load_workload(const std::filesystem::path& path, const EnvLookup& env) {
  return parse_workload(read_file(path), env);
}

}  // namespace mitocount
