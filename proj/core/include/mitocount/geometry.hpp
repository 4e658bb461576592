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

/// @file geometry.hpp
/// @brief Convex hull, minimum-area enclosing rectangle and pixel-boundary
/// contours.

#include <span>
#include <vector>

#include "mitocount/components.hpp"
#include "mitocount/units.hpp"

namespace mitocount {

/// Rectangle of size width x height rotated by angle_deg in [0, 90); `width`
/// runs along the angle direction.
struct RotatedRect {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  double angle_deg = 0.0;

  [[nodiscard]] double area() const noexcept { return width * height; }
  [[nodiscard]] double longest_side() const noexcept { return width > height ? width : height; }
};

/// Counter-clockwise hull (in x-right/y-up orientation) without duplicate or
/// collinear vertices, starting at the lexicographically smallest point.
[[nodiscard]] std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Minimum-area enclosing rectangle by rotating calipers over the hull.
/// One distinct point gives a zero-size rectangle at that point; collinear
/// points give a zero-height rectangle along the segment.
/// Throws std::invalid_argument for an empty contour.
[[nodiscard]] RotatedRect min_area_rect(std::span<const Point2> contour);

/// Outer pixel-edge boundary of one label, as lattice vertices (pixel (c,r)
/// covers [c,c+1]x[r,r+1]). Collinear vertices are dropped; no other
/// simplification. Pixels of the label that touch only diagonally are walked
/// as connected.
[[nodiscard]] std::vector<Point2> trace_outer_contour(const LabelImage& labels, int label);

}  // namespace mitocount
