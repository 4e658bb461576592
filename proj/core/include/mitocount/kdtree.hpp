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

/// @file kdtree.hpp
/// @brief Static 2-d tree over points with Chebyshev (L-infinity) range
/// counting and reporting.
///
/// The tree is implicit: points are permuted so that the node of an index
/// range [lo, hi) sits at mid = (lo + hi) / 2, split on x at even depths and
/// y at odd depths (median split). Each node stores the bounding box of its
/// subtree, which lets a count query add whole subtrees that lie inside the
/// query square without visiting them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mitocount/units.hpp"

namespace mitocount {

/// Closed one-axis membership |v - c| <= r, widened by a relative 1e-12 so a
/// point on the edge of a square whose center was computed as corner + r is
/// not lost to rounding. Monotone in v on each side of c, which is what makes
/// box-level shortcuts exact.
[[nodiscard]] inline bool within_radius(double v, double c, double r) noexcept {
  return std::abs(v - c) <= r + 1e-12 * (std::abs(c) + r);
}

/// Closed Chebyshev ball membership using within_radius on both axes.
[[nodiscard]] inline bool in_chebyshev_ball(Point2 p, Point2 center, double r) noexcept {
  return within_radius(p.x, center.x, r) && within_radius(p.y, center.y, r);
}

struct RangeResult {
  std::size_t count = 0;
  /// Indices into the point list the tree was built from, ascending.
  std::vector<std::size_t> member_ids;
};

class KdTree2 {
 public:
  KdTree2() = default;
  /// O(n log n). Duplicates are kept. Throws std::invalid_argument for
  /// non-finite points.
  explicit KdTree2(std::vector<Point2> points);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
  [[nodiscard]] std::span<const Point2> points() const noexcept { return points_; }
  /// Number of levels (0 for an empty tree).
  [[nodiscard]] int depth() const noexcept { return depth_; }

  /// Points p with chebyshev(p, center) <= r. Throws std::invalid_argument
  /// for negative or non-finite r.
  [[nodiscard]] RangeResult range_query(Point2 center, double r) const;
  [[nodiscard]] std::size_t range_count(Point2 center, double r) const;

  /// Axis-aligned rectangle |x - cx| <= half_x, |y - cy| <= half_y (same
  /// tolerance as within_radius). Either half-width may be +infinity.
  [[nodiscard]] std::vector<std::size_t> rect_query(Point2 center, double half_x, double half_y) const;

  /// Indices (ascending) of points within Euclidean distance r of center.
  [[nodiscard]] std::vector<std::size_t> radius_query(Point2 center, double r) const;

  /// Every original index reached by a full traversal (test hook for the
  /// reachability invariant).
  [[nodiscard]] std::vector<std::size_t> traverse() const;

 private:
  struct Box {
    double min_x, min_y, max_x, max_y;
  };

  int build(std::size_t lo, std::size_t hi, int level);
  std::size_t count_rec(std::size_t lo, std::size_t hi, Point2 c, double rx, double ry) const;
  template <typename Fn>
  void report_rec(std::size_t lo, std::size_t hi, Point2 c, double rx, double ry, Fn&& fn) const;

  std::vector<Point2> points_;
  std::vector<std::uint32_t> order_;  // tree slot -> original index
  std::vector<Point2> slots_;         // points in tree order
  std::vector<Box> boxes_;            // subtree box per slot
  int depth_ = 0;
};

}  // namespace mitocount
