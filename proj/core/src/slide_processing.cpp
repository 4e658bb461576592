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

#include "mitocount/slide_processing.hpp"

#include <algorithm>

#include "mitocount/error.hpp"
#include "mitocount/png_io.hpp"

namespace mitocount {

void validate(const SlideProcessingOptions& options) {
  if (options.batch_size < 1 || options.batch_size > kMaxBatchSize) {
    throw ConfigError("batch size must lie in [1, 16]");
  }
  if (!(options.binarize_threshold > 0.0 && options.binarize_threshold < 1.0)) {
    throw ConfigError("binarize threshold must lie in (0, 1)");
  }
  if (!(options.tiles.min_coverage >= 0.0 && options.tiles.min_coverage <= 1.0)) {
    throw ConfigError("tile min_coverage must lie in [0, 1]");
  }
  if (options.tissue_refine.close_iterations < 0) throw ConfigError("close_iterations must be >= 0");
  if (!(options.post.min_width_um >= 0.0) || !(options.post.max_interpolar_um >= 0.0)) {
    throw ConfigError("post-processing micron thresholds must be >= 0");
  }
}

LoadedSlide load_slide(const std::filesystem::path& dir) {
  return {read_manifest(dir / "manifest.json"), dir};
}

InferenceOutput infer_slide(const LoadedSlide& slide, const SlideGate& gate, const Detector& detector,
                            const SlideProcessingOptions& options) {
  const SlideManifest& m = slide.manifest;
  InferenceOutput out;
  out.gate = gate.classify(read_png_rgb(slide.dir / m.thumbnail_path), m.gate_truth);
  if (out.gate.label == GateLabel::kNoCount) return out;

  const BinaryMask tissue = detect_tissue(read_png_rgb(slide.dir / m.overview_path), options.tissue_refine);
  TileOptions tile_options = options.tiles;
  tile_options.window_px = m.tile_px;
  out.grid = tissue_tiles(tissue, m.dims(), tile_options);

  const bool needs_truth = detector.descriptor().needs_truth;
  const auto& offsets = out.grid.tiles;
  for (std::size_t begin = 0; begin < offsets.size(); begin += options.batch_size) {
    const std::size_t end = std::min(offsets.size(), begin + options.batch_size);
    TileBatch batch;
    for (std::size_t i = begin; i < end; ++i) {
      const TileEntry* entry = m.find_tile(offsets[i]);
      if (entry == nullptr) {
        throw IoError("slide " + m.slide_id + " has no tile at " + std::to_string(offsets[i].x) + "," +
                      std::to_string(offsets[i].y));
      }
      batch.tiles.push_back(read_png_rgb(slide.dir / entry->path));
      batch.offsets.push_back(offsets[i]);
      if (needs_truth) {
        batch.truth.push_back(rasterize_truth(m, offsets[i], batch.tiles.back().width(), batch.tiles.back().height()));
      }
    }
    auto probs = detect_tile_batch(batch, detector);
    ++out.detector_calls;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out.masks.push_back({batch.offsets[i], binarize(probs[i], options.binarize_threshold)});
    }
  }
  return out;
}

AnnotationDoc make_annotation(const std::string& slide_id, MicronsPerPixel mpp, std::span<const Figure> figures,
                              const HpfRegion& hpf) {
  AnnotationDoc doc;
  doc.slide_id = slide_id;
  doc.mpp = mpp.value();
  for (const auto& f : figures) doc.figures.push_back({f.id, f.center.x, f.center.y, f.width_um, f.contour});
  if (!hpf.empty()) {
    AnnotatedHpf h;
    h.center = *hpf.center;
    h.side_px = 2.0 * hpf.radius_px;
    h.count = static_cast<int>(hpf.count);
    for (auto idx : hpf.member_ids) h.member_ids.push_back(figures[idx].id);
    doc.hpf = std::move(h);
  }
  return doc;
}

SlideAnalysis analyze_masks(std::span<const TileMask> masks, const std::string& slide_id, MicronsPerPixel mpp,
                            const SlideProcessingOptions& options) {
  std::vector<MfInstance> instances;
  std::vector<TileOffset> offsets;
  for (const auto& tile : masks) {
    auto found = process_tile_mask(tile.mask, tile.offset, mpp, options.post);
    for (auto& inst : found) {
      instances.push_back(std::move(inst));
      offsets.push_back(tile.offset);
    }
  }
  SlideAnalysis out;
  out.figures = assemble_figures(instances, offsets, mpp, options.global_merge, options.post.max_interpolar_um);
  std::vector<Point2> centers;
  centers.reserve(out.figures.size());
  for (const auto& f : out.figures) centers.push_back(f.center);
  const HpfGeometry geom = hpf_geometry(mpp);
  out.hpf = find_best_hpf(centers, geom);
  out.hpf.radius_px = geom.radius_px;
  out.annotation = make_annotation(slide_id, mpp, out.figures, out.hpf);
  return out;
}

}  // namespace mitocount
