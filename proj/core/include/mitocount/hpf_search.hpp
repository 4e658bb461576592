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

/// @file hpf_search.hpp
/// @brief Exact maximum-count 10HPF square search.
///
/// Any optimal axis-aligned square can be slid left and down until its low
/// x edge and low y edge each touch a point, so the lower-left corners
/// {x_i} x {y_j} over the point coordinates contain an optimum. Each corner
/// is turned into a Chebyshev ball center by adding the radius and counted.

#include <optional>
#include <span>
#include <vector>

#include "mitocount/kdtree.hpp"
#include "mitocount/units.hpp"

namespace mitocount {

struct HpfRegion {
  /// Absent only for an empty input.
  std::optional<Point2> center;
  double radius_px = 0.0;
  std::size_t count = 0;
  /// Ascending indices into the searched point list.
  std::vector<std::size_t> member_ids;

  [[nodiscard]] bool empty() const noexcept { return !center.has_value(); }
};

/// {(x + r, y + r)} over distinct x and distinct y coordinates, ordered by x
/// then y. Throws std::invalid_argument for an empty input or negative r.
[[nodiscard]] std::vector<Point2> candidate_centers(std::span<const Point2> points, double r);

enum class HpfStrategy {
  /// One k-d range-reporting query per distinct candidate x (the vertical
  /// band |x - cx| <= r), then each candidate in that column is counted
  /// exactly by binary search over the band's sorted y values.
  kColumnBands,
  /// One k-d range_count per candidate center.
  kPerCandidate,
};

/// Max-count square over all candidate centers using the k-d tree.
/// Ties resolve to the lexicographically smallest (x, y) center. Both
/// strategies return identical regions.
[[nodiscard]] HpfRegion find_best_hpf(std::span<const Point2> points, const HpfGeometry& geom,
                                      HpfStrategy strategy = HpfStrategy::kColumnBands);

/// Same candidates and tie-break, counted by linear scan. O(n^3).
[[nodiscard]] HpfRegion brute_force_best_hpf(std::span<const Point2> points, const HpfGeometry& geom);

}  // namespace mitocount
