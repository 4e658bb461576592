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

#include "mitocount/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mitocount {
namespace {

void check_radius(Point2 center, double r) {
  if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("range query radius must be finite and >= 0");
  if (!is_finite(center)) throw std::invalid_argument("range query center must be finite");
}

}  // namespace

KdTree2::KdTree2(std::vector<Point2> points) : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!is_finite(p)) throw std::invalid_argument("KdTree2: non-finite point");
  }
  if (points_.size() > UINT32_MAX) throw std::invalid_argument("KdTree2: too many points");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  boxes_.resize(points_.size());
  depth_ = build(0, points_.size(), 0);
  slots_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) slots_[i] = points_[order_[i]];
}

int KdTree2::build(std::size_t lo, std::size_t hi, int level) {
  if (lo >= hi) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  const bool by_x = level % 2 == 0;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return by_x ? points_[a].x < points_[b].x : points_[a].y < points_[b].y;
                   });
  Box box{points_[order_[lo]].x, points_[order_[lo]].y, points_[order_[lo]].x, points_[order_[lo]].y};
  for (std::size_t i = lo; i < hi; ++i) {
    const Point2& p = points_[order_[i]];
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  boxes_[mid] = box;
  const int left = build(lo, mid, level + 1);
  const int right = build(mid + 1, hi, level + 1);
  return 1 + std::max(left, right);
}

std::size_t KdTree2::count_rec(std::size_t lo, std::size_t hi, Point2 c, double rx, double ry) const {
  std::size_t total = 0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const Box& b = boxes_[mid];
    const bool in_lo_x = within_radius(b.min_x, c.x, rx);
    const bool in_hi_x = within_radius(b.max_x, c.x, rx);
    const bool in_lo_y = within_radius(b.min_y, c.y, ry);
    const bool in_hi_y = within_radius(b.max_y, c.y, ry);
    if (in_lo_x && in_hi_x && in_lo_y && in_hi_y) return total + (hi - lo);
    // Disjoint when the whole box lies beyond one side of the square.
    if ((!in_hi_x && b.max_x < c.x) || (!in_lo_x && b.min_x > c.x) || (!in_hi_y && b.max_y < c.y) ||
        (!in_lo_y && b.min_y > c.y)) {
      return total;
    }
    if (within_radius(slots_[mid].x, c.x, rx) && within_radius(slots_[mid].y, c.y, ry)) ++total;
    total += count_rec(lo, mid, c, rx, ry);
    lo = mid + 1;
  }
  return total;
}

template <typename Fn>
void KdTree2::report_rec(std::size_t lo, std::size_t hi, Point2 c, double rx, double ry, Fn&& fn) const {
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const Box& b = boxes_[mid];
    const bool in_lo_x = within_radius(b.min_x, c.x, rx);
    const bool in_hi_x = within_radius(b.max_x, c.x, rx);
    const bool in_lo_y = within_radius(b.min_y, c.y, ry);
    const bool in_hi_y = within_radius(b.max_y, c.y, ry);
    if ((!in_hi_x && b.max_x < c.x) || (!in_lo_x && b.min_x > c.x) || (!in_hi_y && b.max_y < c.y) ||
        (!in_lo_y && b.min_y > c.y)) {
      return;
    }
    if (in_lo_x && in_hi_x && in_lo_y && in_hi_y) {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
      return;
    }
    if (within_radius(slots_[mid].x, c.x, rx) && within_radius(slots_[mid].y, c.y, ry)) fn(mid);
    report_rec(lo, mid, c, rx, ry, fn);
    lo = mid + 1;
  }
}

RangeResult KdTree2::range_query(Point2 center, double r) const {
  check_radius(center, r);
  RangeResult out;
  report_rec(0, slots_.size(), center, r, r, [&](std::size_t slot) { out.member_ids.push_back(order_[slot]); });
  std::sort(out.member_ids.begin(), out.member_ids.end());
  out.count = out.member_ids.size();
  return out;
}

std::size_t KdTree2::range_count(Point2 center, double r) const {
  check_radius(center, r);
  return count_rec(0, slots_.size(), center, r, r);
}

std::vector<std::size_t> KdTree2::rect_query(Point2 center, double half_x, double half_y) const {
  if (!is_finite(center)) throw std::invalid_argument("rect query center must be finite");
  if (std::isnan(half_x) || std::isnan(half_y) || half_x < 0.0 || half_y < 0.0) {
    throw std::invalid_argument("rect query half-widths must be >= 0");
  }
  std::vector<std::size_t> ids;
  report_rec(0, slots_.size(), center, half_x, half_y, [&](std::size_t slot) { ids.push_back(order_[slot]); });
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::size_t> KdTree2::radius_query(Point2 center, double r) const {
  check_radius(center, r);
  std::vector<std::size_t> ids;
  report_rec(0, slots_.size(), center, r, r, [&](std::size_t slot) {
    if (euclidean(slots_[slot], center) <= r) ids.push_back(order_[slot]);
  });
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::size_t> KdTree2::traverse() const {
  std::vector<std::size_t> ids;
  ids.reserve(order_.size());
  // Depth-first over the implicit layout.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, slots_.size()}};
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    if (lo >= hi) continue;
    const std::size_t mid = lo + (hi - lo) / 2;
    ids.push_back(order_[mid]);
    stack.push_back({lo, mid});
    stack.push_back({mid + 1, hi});
  }
  return ids;
}

}  // namespace mitocount
