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

/// @file tissue.hpp
/// @brief Coarse tissue segmentation on a low-resolution slide view and the
/// sliding-window tile grid derived from it.
///
/// Scanners are back-lit, so background is bright: tissue is the dark class
/// of an Otsu split of the CIELAB lightness channel.

#include <cstdint>
#include <span>
#include <vector>

#include "mitocount/image.hpp"

namespace mitocount {

/// sRGB (D65) -> CIELAB L*, rescaled from [0,100] to [0,255] and rounded.
/// Throws std::invalid_argument on an empty image.
[[nodiscard]] GrayImage rgb_to_lab_l(const RgbImage& rgb);

/// L* in [0,100] for one sRGB pixel.
[[nodiscard]] double lab_lightness(Rgb pixel) noexcept;

struct OtsuResult {
  int threshold = 0;
  /// Only one populated bin; threshold is that bin.
  bool degenerate = false;
};

/// Threshold t maximising the between-class variance of {<= t} vs {> t}.
/// Ties resolve to the smallest t. Comparisons are exact (integer
/// arithmetic), so equal-variance splits really tie.
/// Throws std::invalid_argument for a histogram without 256 bins or with no
/// mass.
[[nodiscard]] OtsuResult otsu_threshold(std::span<const std::uint64_t> histogram);

struct RefineOptions {
  int close_iterations = 2;
  bool blur = true;
};

/// Morphological closing followed by blur + re-threshold at 0.5.
[[nodiscard]] BinaryMask refine_mask(const BinaryMask& mask, const RefineOptions& options = {});

/// Pixels with lightness at or above this are background regardless of the
/// Otsu split (uniformly blank views yield a degenerate histogram).
inline constexpr int kBackgroundLightness = 235;

/// L channel -> Otsu -> dark class -> refine_mask.
[[nodiscard]] BinaryMask detect_tissue(const RgbImage& low_res, const RefineOptions& options = {});

struct SlideDims {
  int width_px = 0;
  int height_px = 0;
};

struct TileOffset {
  int x = 0;
  int y = 0;
  friend bool operator==(const TileOffset&, const TileOffset&) = default;
  friend auto operator<=>(const TileOffset&, const TileOffset&) = default;
};

struct TileGrid {
  int window_px = 600;
  /// Full-resolution pixels per low-resolution mask pixel along x and y.
  double scale_x = 1.0;
  double scale_y = 1.0;
  int columns = 0;
  int rows = 0;
  /// Slide padded with background to a whole number of windows.
  int padded_width = 0;
  int padded_height = 0;
  /// Selected tiles in raster order; offsets are multiples of window_px.
  std::vector<TileOffset> tiles;
};

struct TileOptions {
  int window_px = 600;
  /// Minimum fraction of a tile's in-slide area covered by tissue.
  double min_coverage = 0.05;
};

/// Non-overlapping window grid over the padded slide, keeping tiles whose
/// tissue coverage reaches options.min_coverage. `mask` spans the unpadded
/// slide at any resolution.
[[nodiscard]] TileGrid tissue_tiles(const BinaryMask& mask, SlideDims slide,
                                    const TileOptions& options = {});

/// Tissue coverage fraction per grid cell (row-major, columns x rows).
[[nodiscard]] std::vector<double> tile_coverage(const BinaryMask& mask, SlideDims slide,
                                                int window_px);

}  // namespace mitocount
