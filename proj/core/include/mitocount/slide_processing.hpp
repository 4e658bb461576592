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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mitocount/annotation_xml.hpp"
#include "mitocount/detector.hpp"
#include "mitocount/hpf_search.hpp"
#include "mitocount/postprocess.hpp"
#include "mitocount/synthetic.hpp"
#include "mitocount/tissue.hpp"

namespace mitocount {

struct SlideProcessingOptions {
  TileOptions tiles{};  // window_px is taken from the slide
  RefineOptions tissue_refine{};
  TilePostprocessOptions post{};
  bool global_merge = true;
  double binarize_threshold = 0.5;
  std::size_t batch_size = kMaxBatchSize;
};

/// Throws ConfigError.
void validate(const SlideProcessingOptions& options);

struct LoadedSlide {
  SlideManifest manifest;
  std::filesystem::path dir;
};

/// Reads `dir`/manifest.json.
[[nodiscard]] LoadedSlide load_slide(const std::filesystem::path& dir);

struct TileMask {
  TileOffset offset;
  BinaryMask mask;
};

struct InferenceOutput {
  GateDecision gate;
  TileGrid grid;
  /// One binary mask per selected tile, in grid order. Empty when gated out.
  std::vector<TileMask> masks;
  std::size_t detector_calls = 0;
};

/// Thumbnail -> gate; for count slides, overview -> tissue mask -> tiles ->
/// batched detector -> binarized masks.
[[nodiscard]] InferenceOutput infer_slide(const LoadedSlide& slide, const SlideGate& gate,
                                          const Detector& detector, const SlideProcessingOptions& options);

struct SlideAnalysis {
  std::vector<Figure> figures;
  HpfRegion hpf;
  AnnotationDoc annotation;
};

/// Per-tile post-processing, slide-level merge, then the 10HPF search.
[[nodiscard]] SlideAnalysis analyze_masks(std::span<const TileMask> masks, const std::string& slide_id,
                                          MicronsPerPixel mpp, const SlideProcessingOptions& options);

[[nodiscard]] AnnotationDoc make_annotation(const std::string& slide_id, MicronsPerPixel mpp,
                                            std::span<const Figure> figures, const HpfRegion& hpf);

}  // namespace mitocount
