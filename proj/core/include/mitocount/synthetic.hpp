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
#include <optional>
#include <string>
#include <vector>

#include "mitocount/detector.hpp"
#include "mitocount/image.hpp"
#include "mitocount/tissue.hpp"
#include "mitocount/units.hpp"

namespace mitocount {

/// Axis-aligned-or-rotated ellipse in full-resolution pixels.
struct TissueRegion {
  Point2 center;
  double semi_x_px = 0.0;
  double semi_y_px = 0.0;
  double angle_deg = 0.0;
  friend bool operator==(const TissueRegion&, const TissueRegion&) = default;
};

struct PlantedFigure {
  int id = 0;
  Point2 center;  // full-resolution px
  double major_um = 0.0;
  double minor_um = 0.0;
  double orientation_deg = 0.0;  // major axis, from +x towards +y
  bool is_speck = false;
  std::optional<int> pair_partner;
  /// Boundary-to-boundary gap to the partner; set on both halves of a pair.
  std::optional<double> pair_gap_um;
  friend bool operator==(const PlantedFigure&, const PlantedFigure&) = default;
};

struct TileEntry {
  TileOffset offset;
  std::string path;  // relative to the slide directory
  friend bool operator==(const TileEntry&, const TileEntry&) = default;
};

struct SlideManifest {
  std::string slide_id;
  int width_px = 0;
  int height_px = 0;
  double mpp = 0.25;
  int tile_px = kDefaultWindowPx;
  std::uint64_t seed = 0;
  std::vector<TileEntry> tiles;
  std::string thumbnail_path;
  std::string overview_path;
  int overview_downsample = 16;
  std::optional<GateLabel> gate_truth;
  std::vector<TissueRegion> tissue;
  std::vector<PlantedFigure> ground_truth;

  [[nodiscard]] SlideDims dims() const noexcept { return {width_px, height_px}; }
  [[nodiscard]] MicronsPerPixel microns_per_pixel() const { return MicronsPerPixel(mpp); }
  [[nodiscard]] int padded_width() const noexcept;
  [[nodiscard]] int padded_height() const noexcept;
  /// Count a correct detector plus post-processing should report: every
  /// non-speck figure, with pairs closer than the interpolar limit counted once.
  [[nodiscard]] int expected_count(double max_interpolar_um = 15.0) const;
  [[nodiscard]] const TileEntry* find_tile(TileOffset offset) const noexcept;

  friend bool operator==(const SlideManifest&, const SlideManifest&) = default;
};

struct SyntheticSpec {
  std::string slide_id = "slide";
  int width_px = 4800;
  int height_px = 3600;
  double mpp = 0.25;
  int n_figures = 5;
  int n_specks = 0;
  int n_pairs = 0;
  /// Cycled over the pairs.
  std::vector<double> pair_gaps_um{10.0};
  /// 0 yields a blank slide.
  double tissue_fraction = 0.5;
  std::optional<GateLabel> gate;  // defaults to count iff there is tissue
  double min_separation_um = 30.0;
  int tile_px = kDefaultWindowPx;
  int overview_downsample = 16;
  std::uint64_t seed = 1;
};

/// Throws ConfigError when the spec is unusable.
void validate(const SyntheticSpec& spec);

/// Places tissue and figures without rendering or writing anything. Throws
/// std::runtime_error when rejection sampling cannot fit every object.
[[nodiscard]] SlideManifest plan_synthetic_slide(const SyntheticSpec& spec);

/// Plans, renders and writes a slide into `slide_dir` (tiles, thumbnail,
/// overview, manifest.json) and returns its manifest.
SlideManifest gen_synthetic_slide(const SyntheticSpec& spec, const std::filesystem::path& slide_dir);

/// Full-resolution render of [x0, x0+w) x [y0, y0+h); outside the slide is white.
[[nodiscard]] RgbImage render_region(const SlideManifest& manifest, int x0, int y0, int w, int h);
/// Point-sampled at block centres; ceil(width / factor) x ceil(height / factor).
[[nodiscard]] RgbImage render_overview(const SlideManifest& manifest, int factor);
/// Aspect-preserving fit into a white 224x224 canvas.
[[nodiscard]] RgbImage render_thumbnail(const SlideManifest& manifest);
/// Planted-figure coverage for a region, using the renderer's pixel predicate.
[[nodiscard]] BinaryMask rasterize_truth(const SlideManifest& manifest, TileOffset offset, int w, int h);

void write_manifest(const SlideManifest& manifest, const std::filesystem::path& path);
/// Throws ParseError on malformed content.
[[nodiscard]] SlideManifest read_manifest(const std::filesystem::path& path);
[[nodiscard]] std::string manifest_to_json(const SlideManifest& manifest);

/// A spec file is one JSON object, or an object whose "slides" array entries
/// override its other keys. "repeat": n expands an entry into n slides with
/// consecutive seeds and a numeric id suffix.
[[nodiscard]] std::vector<SyntheticSpec> read_synthetic_specs(const std::filesystem::path& path);
[[nodiscard]] std::vector<SyntheticSpec> parse_synthetic_specs(const std::string& json_text);

}  // namespace mitocount
