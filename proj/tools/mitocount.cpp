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

// Command-line entry points: synthetic data, the full pipeline, post-processing
// of stored masks, HPF search timing, tissue maps and annotation validation.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mitocount/annotation_xml.hpp"
#include "mitocount/error.hpp"
#include "mitocount/config.hpp"
#include "mitocount/hpf_search.hpp"
#include "mitocount/pipeline.hpp"
#include "mitocount/png_io.hpp"
#include "mitocount/slide_processing.hpp"
#include "mitocount/synthetic.hpp"
#include "mitocount/tissue.hpp"

namespace fs = std::filesystem;
using namespace mitocount;

namespace {

int gen_synthetic(const fs::path& spec_path, const fs::path& out, std::optional<std::uint64_t> seed,
                  bool truth_masks) {
  auto specs = read_synthetic_specs(spec_path);
  for (auto& spec : specs) {
    if (seed) spec.seed += *seed;
    const auto m = gen_synthetic_slide(spec, out / spec.slide_id);
    if (truth_masks) {
      // Planted figures per tile, in the layout `postprocess --masks` reads.
      const fs::path dir = out / spec.slide_id / "truth";
      fs::create_directories(dir);
      for (const auto& t : m.tiles) {
        write_mask_png(dir / ("mask_" + std::to_string(t.offset.x) + "_" + std::to_string(t.offset.y) + ".png"),
                       rasterize_truth(m, t.offset, m.tile_px, m.tile_px));
      }
    }
    std::cout << m.slide_id << ": " << m.tiles.size() << " tiles, " << m.ground_truth.size()
              << " planted objects, expected count " << m.expected_count() << '\n';
  }
  return 0;
}

int run_pipeline_cmd(const fs::path& config_path, const fs::path& workload_path, const fs::path& out,
                     std::optional<std::uint64_t> seed) {
  const PipelineConfig config = load_pipeline_config(config_path);
  WorkloadSpec workload = load_workload(workload_path);
  if (seed) workload.seed = *seed;
  const PipelineMetrics metrics = run_pipeline(config, workload, out);
  std::cout << summarize(metrics);
  return metrics.count(JobStatus::kFailed) == 0 ? 0 : 2;
}

int postprocess_cmd(const fs::path& masks_dir, double mpp_value, const fs::path& out, const std::string& slide_id,
                    bool local_merge, bool global_merge) {
  const MicronsPerPixel mpp(mpp_value);
  const std::regex name(R"(mask_(\d+)_(\d+)\.png)");
  std::vector<TileMask> masks;
  for (const auto& entry : fs::directory_iterator(masks_dir)) {
    std::smatch match;
    const std::string file = entry.path().filename().string();
    if (!entry.is_regular_file() || !std::regex_match(file, match, name)) continue;
    masks.push_back({{std::stoi(match[1]), std::stoi(match[2])}, read_mask_png(entry.path())});
  }
  if (masks.empty()) throw IoError("no mask_<x>_<y>.png files in " + masks_dir.string());
  std::sort(masks.begin(), masks.end(), [](const TileMask& a, const TileMask& b) {
    return std::pair(a.offset.y, a.offset.x) < std::pair(b.offset.y, b.offset.x);
  });
  SlideProcessingOptions options;
  options.post.local_merge = local_merge;
  options.global_merge = global_merge;
  const SlideAnalysis analysis = analyze_masks(masks, slide_id, mpp, options);
  write_annotation_xml(analysis.annotation, out);
  std::cout << slide_id << ": " << analysis.figures.size() << " figures, 10HPF count " << analysis.hpf.count
            << " -> " << out.string() << '\n';
  return 0;
}

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int bench_hpf(const std::vector<int>& sizes, std::uint64_t seed, const fs::path& out, double mpp_value,
              double extent_mm) {
  const MicronsPerPixel mpp(mpp_value);
  const HpfGeometry geom = hpf_geometry(mpp);
  const double extent_px = microns_to_pixels(extent_mm * 1000.0, mpp);
  std::ofstream csv(out);
  if (!csv) throw IoError("cannot write " + out.string());
  csv << "mf_total,brute_max_count,brute_s,kd_max_count,kd_s,net_saving_s,speedup\n";
  csv << std::setprecision(6);
  for (int n : sizes) {
    if (n < 1) throw std::invalid_argument("--n entries must be >= 1");
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
    std::uniform_real_distribution<double> u(0.0, extent_px);
    std::vector<Point2> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {u(rng), u(rng)};
    HpfRegion brute, kd;
    const double brute_s = seconds([&] { brute = brute_force_best_hpf(pts, geom); });
    const double kd_s = seconds([&] { kd = find_best_hpf(pts, geom); });
    csv << n << ',' << brute.count << ',' << brute_s << ',' << kd.count << ',' << kd_s << ',' << brute_s - kd_s << ','
        << (kd_s > 0.0 ? brute_s / kd_s : 0.0) << '\n';
    std::cout << "n=" << n << " brute " << brute.count << " in " << brute_s << " s, k-d " << kd.count << " in "
              << kd_s << " s\n";
    if (brute.count != kd.count) {
      std::cerr << "error: k-d and brute-force counts differ at n=" << n << '\n';
      return 3;
    }
  }
  return 0;
}

int tissue_map(const fs::path& slide_dir, const fs::path& out, double min_coverage) {
  const LoadedSlide slide = load_slide(slide_dir);
  const auto& m = slide.manifest;
  RgbImage overview = read_png_rgb(slide.dir / m.overview_path);
  const BinaryMask mask = detect_tissue(overview);
  TileOptions options;
  options.window_px = m.tile_px;
  options.min_coverage = min_coverage;
  const TileGrid grid = tissue_tiles(mask, m.dims(), options);
  for (int y = 0; y < overview.height(); ++y) {
    for (int x = 0; x < overview.width(); ++x) {
      if (mask(x, y) == 0) continue;
      auto& p = overview(x, y);
      p = {static_cast<std::uint8_t>((p.r + 0) / 2), static_cast<std::uint8_t>((p.g + 255) / 2),
           static_cast<std::uint8_t>((p.b + 0) / 2)};
    }
  }
  for (const auto& t : grid.tiles) {
    const int x0 = static_cast<int>(t.x / grid.scale_x), y0 = static_cast<int>(t.y / grid.scale_y);
    const int x1 = std::min(overview.width() - 1, static_cast<int>((t.x + grid.window_px) / grid.scale_x) - 1);
    const int y1 = std::min(overview.height() - 1, static_cast<int>((t.y + grid.window_px) / grid.scale_y) - 1);
    for (int x = x0; x <= x1; ++x) {
      if (overview.contains(x, y0)) overview(x, y0) = {0, 0, 255};
      if (overview.contains(x, y1)) overview(x, y1) = {0, 0, 255};
    }
    for (int y = y0; y <= y1; ++y) {
      if (overview.contains(x0, y)) overview(x0, y) = {0, 0, 255};
      if (overview.contains(x1, y)) overview(x1, y) = {0, 0, 255};
    }
  }
  write_png(out, overview);
  std::cout << m.slide_id << ": " << grid.tiles.size() << " of " << grid.columns * grid.rows
            << " tiles selected -> " << out.string() << '\n';
  return 0;
}

int validate_xml(const fs::path& path) {
  const AnnotationDoc doc = read_annotation_xml(path);
  std::cout << path.string() << ": ok, " << doc.figures.size() << " figures";
  if (doc.hpf) std::cout << ", 10HPF count " << doc.hpf->count;
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mitocount: mitotic figure counting pipeline on synthetic whole-slide images"};
  app.set_version_flag("--version", "mitocount 0.1.0");
  app.require_subcommand(1);
  int status = 0;

  fs::path spec, out_dir, config, workload, masks, xml_out, csv_out, slide_dir, png_out, xml_in;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t bench_seed = 42;
  double mpp = 0.25, extent_mm = 20.0, min_coverage = 0.05;
  std::string slide_id = "slide";
  bool no_local_merge = false, no_global_merge = false, truth_masks = false;
  std::vector<int> sizes{1, 240, 500, 750, 959};

  auto* gen = app.add_subcommand("gen-synthetic", "Materialize synthetic slides from a JSON spec");
  gen->add_option("--spec", spec, "Synthetic spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out_dir, "Output directory")->required()->envname("MITOCOUNT_OUT_DIR");
  gen->add_option("--seed", seed_override, "Added to every slide seed");
  gen->add_flag("--truth-masks", truth_masks, "Also write planted masks to <slide>/truth/mask_<x>_<y>.png");

  auto* run = app.add_subcommand("run-pipeline", "Run the download/inference/post-processing pipeline");
  run->add_option("--config", config, "Pipeline config (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--workload", workload, "Workload spec (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required()->envname("MITOCOUNT_OUT_DIR");
  run->add_option("--seed", seed_override, "Overrides the workload seed");

  auto* post = app.add_subcommand("postprocess", "Post-process stored tile masks into annotation XML");
  post->add_option("--masks", masks, "Directory of mask_<x>_<y>.png")->required()->check(CLI::ExistingDirectory);
  post->add_option("--mpp", mpp, "Microns per pixel")->required()->check(CLI::PositiveNumber);
  post->add_option("--out", xml_out, "Annotation XML path")->required();
  post->add_option("--slide-id", slide_id, "Slide id written into the XML");
  post->add_flag("--no-local-merge", no_local_merge, "Skip the per-tile interpolar dilation merge");
  post->add_flag("--no-global-merge", no_global_merge, "Skip the slide-level center merge");

  auto* bench = app.add_subcommand("bench-hpf", "Time brute-force vs k-d tree 10HPF search");
  bench->add_option("--n", sizes, "Comma-separated figure counts")->delimiter(',');
  bench->add_option("--seed", bench_seed, "Point-set seed");
  bench->add_option("--out", csv_out, "CSV output")->required();
  bench->add_option("--mpp", mpp, "Microns per pixel")->check(CLI::PositiveNumber);
  bench->add_option("--extent-mm", extent_mm, "Square slide extent in mm")->check(CLI::PositiveNumber);

  auto* tmap = app.add_subcommand("tissue-map", "Render the tissue mask and selected tile grid");
  tmap->add_option("--slide", slide_dir, "Slide directory")->required()->check(CLI::ExistingDirectory);
  tmap->add_option("--out", png_out, "Output PNG")->required();
  tmap->add_option("--min-coverage", min_coverage, "Tile tissue coverage threshold")->check(CLI::Range(0.0, 1.0));

  auto* vxml = app.add_subcommand("validate-xml", "Check an annotation XML against schema and invariants");
  vxml->add_option("file", xml_in, "Annotation XML")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) status = gen_synthetic(spec, out_dir, seed_override, truth_masks);
    if (*run) status = run_pipeline_cmd(config, workload, out_dir, seed_override);
    if (*post) status = postprocess_cmd(masks, mpp, xml_out, slide_id, !no_local_merge, !no_global_merge);
    if (*bench) status = bench_hpf(sizes, bench_seed, csv_out, mpp, extent_mm);
    if (*tmap) status = tissue_map(slide_dir, png_out, min_coverage);
    if (*vxml) status = validate_xml(xml_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
