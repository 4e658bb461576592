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

#include "mitocount/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mitocount {
namespace {

double cross(Point2 o, Point2 a, Point2 b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }

// Maps (width, height, angle) into the canonical angle range [0, 90).
RotatedRect canonical(Point2 center, double width, double height, double angle_deg) {
  double a = std::fmod(angle_deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 90.0 - 1e-9) {
    a = std::max(0.0, a - 90.0);
    std::swap(width, height);
  }
  if (a >= 90.0 - 1e-9) a = 0.0;
  return {center, width, height, a};
}

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

}  // namespace

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

RotatedRect min_area_rect(std::span<const Point2> contour) {
  if (contour.empty()) throw std::invalid_argument("min_area_rect: empty contour");
  for (const auto& p : contour) {
    if (!is_finite(p)) throw std::invalid_argument("min_area_rect: non-finite point");
  }
  const auto hull = convex_hull(contour);
  const std::size_t h = hull.size();
  if (h == 1) return {hull[0], 0.0, 0.0, 0.0};
  if (h == 2) {
    const Point2 d = hull[1] - hull[0];
    const Point2 mid{(hull[0].x + hull[1].x) / 2.0, (hull[0].y + hull[1].y) / 2.0};
    return canonical(mid, std::hypot(d.x, d.y), 0.0, std::atan2(d.y, d.x) * kRadToDeg);
  }

  auto next = [h](std::size_t i) { return (i + 1) % h; };
  std::size_t right = 0, top = 0, left = 0;
  double best_area = std::numeric_limits<double>::infinity();
  RotatedRect best;

  for (std::size_t i = 0; i < h; ++i) {
    const Point2 p = hull[i];
    const Point2 d = hull[next(i)] - p;
    const double len = std::hypot(d.x, d.y);
    const Point2 e{d.x / len, d.y / len};
    const Point2 n{-e.y, e.x};  // inward for a counter-clockwise hull

    if (i == 0) {
      for (std::size_t j = 1; j < h; ++j) {
        if (dot(hull[j], e) > dot(hull[right], e)) right = j;
        if (dot(hull[j], n) > dot(hull[top], n)) top = j;
        if (dot(hull[j], e) < dot(hull[left], e)) left = j;
      }
    } else {
      // Calipers only ever rotate forward.
      for (std::size_t s = 0; s < h && dot(hull[next(right)], e) >= dot(hull[right], e); ++s) right = next(right);
      for (std::size_t s = 0; s < h && dot(hull[next(top)], n) >= dot(hull[top], n); ++s) top = next(top);
      for (std::size_t s = 0; s < h && dot(hull[next(left)], e) <= dot(hull[left], e); ++s) left = next(left);
    }

    const double e_max = dot(hull[right], e);
    const double e_min = dot(hull[left], e);
    const double n_min = dot(p, n);
    const double n_max = dot(hull[top], n);
    const double width = e_max - e_min;
    const double height = n_max - n_min;
    const double area = width * height;
    if (area < best_area) {
      best_area = area;
      const double a = (e_max + e_min) / 2.0;
      const double b = (n_max + n_min) / 2.0;
      const Point2 center{e.x * a + n.x * b, e.y * a + n.y * b};
      best = canonical(center, width, height, std::atan2(e.y, e.x) * kRadToDeg);
    }
  }
  return best;
}

std::vector<Point2> trace_outer_contour(const LabelImage& labels, int label) {
  if (labels.empty() || label <= 0) return {};
  const int w = labels.width();
  const int h = labels.height();
  auto inside = [&](int x, int y) { return labels.contains(x, y) && labels(x, y) == label; };

  // Directed boundary edges keyed by start vertex; interior lies to the
  // walker's right in y-down coordinates.
  struct Edge {
    int dx, dy;
    bool used;
  };
  const std::int64_t stride = static_cast<std::int64_t>(w) + 1;
  auto key = [stride](int x, int y) { return static_cast<std::int64_t>(y) * stride + x; };
  std::unordered_map<std::int64_t, std::vector<Edge>> out_edges;

  int start_x = -1, start_y = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!inside(x, y)) continue;
      if (start_x < 0) {
        start_x = x;
        start_y = y;
      }
      if (!inside(x, y - 1)) out_edges[key(x, y)].push_back({1, 0, false});
      if (!inside(x + 1, y)) out_edges[key(x + 1, y)].push_back({0, 1, false});
      if (!inside(x, y + 1)) out_edges[key(x + 1, y + 1)].push_back({-1, 0, false});
      if (!inside(x - 1, y)) out_edges[key(x, y + 1)].push_back({0, -1, false});
    }
  }
  if (start_x < 0) return {};

  std::vector<Point2> contour;
  int x = start_x, y = start_y, dx = 1, dy = 0;
  // The first pixel in raster order always has a top edge heading east.
  for (auto& e : out_edges[key(x, y)]) {
    if (e.dx == 1 && e.dy == 0) e.used = true;
  }
  contour.push_back({static_cast<double>(x), static_cast<double>(y)});
  x += dx;
  y += dy;

  while (!(x == start_x && y == start_y)) {
    auto& candidates = out_edges[key(x, y)];
    Edge* chosen = nullptr;
    // Preference: left turn, straight, right turn.
    const int prefs[3][2] = {{dy, -dx}, {dx, dy}, {-dy, dx}};
    for (const auto& pref : prefs) {
      for (auto& e : candidates) {
        if (!e.used && e.dx == pref[0] && e.dy == pref[1]) {
          chosen = &e;
          break;
        }
      }
      if (chosen != nullptr) break;
    }
    if (chosen == nullptr) break;  // unreachable for a well-formed boundary
    chosen->used = true;
    if (chosen->dx != dx || chosen->dy != dy) {
      contour.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
    dx = chosen->dx;
    dy = chosen->dy;
    x += dx;
    y += dy;
  }
  return contour;
}

}  // namespace mitocount
