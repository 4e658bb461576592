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

#include "mitocount/hpf_search.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mitocount {
namespace {

std::vector<double> distinct(std::span<const Point2> points, double Point2::*axis) {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.*axis);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_geometry(const HpfGeometry& geom) {
  if (!std::isfinite(geom.radius_px) || geom.radius_px <= 0.0) {
    throw std::invalid_argument("HPF radius must be finite and positive");
  }
}

// Visits candidates in (x, y) order; `count_at` returns the member count.
// Strictly-greater replacement keeps the first (smallest) center on ties.
template <typename CountFn>
std::optional<Point2> best_candidate(std::span<const Point2> points, double r, CountFn&& count_at,
                                     std::size_t& best_count) {
  const auto xs = distinct(points, &Point2::x);
  const auto ys = distinct(points, &Point2::y);
  std::optional<Point2> best;
  best_count = 0;
  for (double x : xs) {
    for (double y : ys) {
      const Point2 c{x + r, y + r};
      const std::size_t n = count_at(c);
      if (!best || n > best_count) {
        best = c;
        best_count = n;
      }
    }
  }
  return best;
}

// Same visiting order and tie rule as best_candidate. A column whose band
// holds no more points than the current best cannot beat it and is skipped.
Point2 best_by_column_bands(const KdTree2& tree, std::span<const Point2> points, double r) {
  const auto xs = distinct(points, &Point2::x);
  const auto ys = distinct(points, &Point2::y);
  const double unbounded = std::numeric_limits<double>::infinity();
  std::optional<Point2> best;
  std::size_t best_count = 0;
  std::vector<double> band_y;
  for (double x : xs) {
    const double cx = x + r;
    const auto band = tree.rect_query({cx, 0.0}, r, unbounded);
    if (best && band.size() <= best_count) continue;
    band_y.clear();
    for (auto id : band) band_y.push_back(points[id].y);
    std::sort(band_y.begin(), band_y.end());
    for (double y : ys) {
      const double cy = y + r;
      // Membership along y is an interval of the sorted values.
      const auto lo = std::partition_point(band_y.begin(), band_y.end(),
                                           [&](double v) { return v < cy && !within_radius(v, cy, r); });
      const auto hi = std::partition_point(lo, band_y.end(),
                                           [&](double v) { return v <= cy || within_radius(v, cy, r); });
      const auto n = static_cast<std::size_t>(hi - lo);
      if (!best || n > best_count) {
        best = Point2{cx, cy};
        best_count = n;
      }
    }
  }
  return *best;
}

}  // namespace

std::vector<Point2> candidate_centers(std::span<const Point2> points, double r) {
  if (points.empty()) throw std::invalid_argument("candidate_centers: no points");
  if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("candidate_centers: bad radius");
  const auto xs = distinct(points, &Point2::x);
  const auto ys = distinct(points, &Point2::y);
  std::vector<Point2> out;
  out.reserve(xs.size() * ys.size());
  for (double x : xs) {
    for (double y : ys) out.push_back({x + r, y + r});
  }
  return out;
}

HpfRegion find_best_hpf(std::span<const Point2> points, const HpfGeometry& geom, HpfStrategy strategy) {
  check_geometry(geom);
  HpfRegion region;
  region.radius_px = geom.radius_px;
  if (points.empty()) return region;

  const KdTree2 tree(std::vector<Point2>(points.begin(), points.end()));
  const double r = geom.radius_px;
  if (strategy == HpfStrategy::kPerCandidate) {
    std::size_t best_count = 0;
    region.center = best_candidate(points, r, [&](Point2 c) { return tree.range_count(c, r); }, best_count);
  } else {
    region.center = best_by_column_bands(tree, points, r);
  }
  auto members = tree.range_query(*region.center, r);
  region.count = members.count;
  region.member_ids = std::move(members.member_ids);
  return region;
}

HpfRegion brute_force_best_hpf(std::span<const Point2> points, const HpfGeometry& geom) {
  check_geometry(geom);
  HpfRegion region;
  region.radius_px = geom.radius_px;
  if (points.empty()) return region;

  const double r = geom.radius_px;
  std::size_t best_count = 0;
  region.center = best_candidate(
      points, r,
      [&](Point2 c) {
        std::size_t n = 0;
        for (const auto& p : points) n += in_chebyshev_ball(p, c, r) ? 1 : 0;
        return n;
      },
      best_count);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (in_chebyshev_ball(points[i], *region.center, r)) region.member_ids.push_back(i);
  }
  region.count = region.member_ids.size();
  return region;
}

}  // namespace mitocount
