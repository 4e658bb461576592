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

/// @file postprocess.hpp
/// @brief Detector mask -> validated mitotic-figure instances.
///
/// Per tile: connected components, interpolar merging by dilation, the
/// minimum-area rectangle of each instance and the minimum-width filter.
/// Per slide: a k-d tree merge of instance centers closer than the
/// interpolar distance, which catches late-stage figures split across tiles.

#include <cstddef>
#include <span>
#include <vector>

#include "mitocount/components.hpp"
#include "mitocount/geometry.hpp"
#include "mitocount/tissue.hpp"
#include "mitocount/units.hpp"

namespace mitocount {

inline constexpr double kMinFigureWidthUm = 3.0;
inline constexpr double kMaxInterpolarUm = 15.0;

struct MfInstance {
  int label = 0;
  std::size_t pixel_count = 0;
  /// Tile coordinates. The exact outer pixel boundary for a single-piece
  /// instance; the convex hull of all pixel corners when merging joined
  /// several pieces.
  std::vector<Point2> contour;
  RotatedRect min_rect;  // tile coordinates
  Point2 center_fullres;
  double width_um = 0.0;
};

/// One MfInstance per label, with min_rect over the pixel-corner hull and
/// center_fullres = min_rect.center + offset.
[[nodiscard]] std::vector<MfInstance> extract_instances(const LabeledMask& labeled, TileOffset offset,
                                                        MicronsPerPixel mpp);

/// Keeps instances whose longest rectangle side, in microns, is at least
/// min_width_um. Order is preserved and kept instances are unchanged.
[[nodiscard]] std::vector<MfInstance> filter_small(std::span<const MfInstance> instances, MicronsPerPixel mpp,
                                                   double min_width_um = kMinFigureWidthUm);

/// Dilation iterations that grow a mask by half the interpolar distance:
/// ceil((max_interpolar_um / 2) / mpp).
[[nodiscard]] int interpolar_dilation_iterations(MicronsPerPixel mpp, double max_interpolar_um = kMaxInterpolarUm);

/// Labels the original foreground pixels with the connected component they
/// fall in after dilating the mask by interpolar_dilation_iterations. Never
/// changes the foreground and never increases the instance count.
[[nodiscard]] LabeledMask merge_interpolar(const BinaryMask& mask, MicronsPerPixel mpp,
                                           double max_interpolar_um = kMaxInterpolarUm,
                                           Connectivity connectivity = Connectivity::kEight);

struct TilePostprocessOptions {
  double min_width_um = kMinFigureWidthUm;
  double max_interpolar_um = kMaxInterpolarUm;
  bool local_merge = true;
  Connectivity connectivity = Connectivity::kEight;
};

/// label -> (merge_interpolar) -> min_area_rect -> filter_small for one tile.
[[nodiscard]] std::vector<MfInstance> process_tile_mask(const BinaryMask& mask, TileOffset offset,
                                                        MicronsPerPixel mpp,
                                                        const TilePostprocessOptions& options = {});

struct GlobalMerge {
  std::vector<Point2> centers;
  /// Input indices per output center, ascending; clusters ordered by their
  /// smallest member.
  std::vector<std::vector<std::size_t>> clusters;
  int passes = 0;
};

/// Links centers within max_interpolar_um (Euclidean, closed) through a k-d
/// radius search, joins linked groups with union-find and replaces each
/// group by the centroid of its input points. Repeats on the centroids until
/// no two are within range, so the result is a fixed point (idempotent).
[[nodiscard]] GlobalMerge merge_global(std::span<const Point2> centers, MicronsPerPixel mpp,
                                       double max_interpolar_um = kMaxInterpolarUm);

/// A counted figure in full-resolution coordinates.
struct Figure {
  int id = 0;
  Point2 center;
  double width_um = 0.0;
  std::vector<Point2> contour;
};

/// Tile instances -> slide figures. With global_merge each merged cluster
/// becomes one figure (centroid center, widest member width, hull of member
/// contours); otherwise one figure per instance. Ids start at 1.
[[nodiscard]] std::vector<Figure> assemble_figures(std::span<const MfInstance> instances,
                                                   std::span<const TileOffset> instance_offsets,
                                                   MicronsPerPixel mpp, bool global_merge,
                                                   double max_interpolar_um = kMaxInterpolarUm);

}  // namespace mitocount
