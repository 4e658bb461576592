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

#include "mitocount/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mitocount/kdtree.hpp"
#include "mitocount/morphology.hpp"

namespace mitocount {
namespace {

struct LabelStats {
  std::size_t pixels = 0;
  int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
};

// Pixels of `label` reachable from its first pixel with 8-connectivity
// equal its pixel count.
bool single_piece(const LabelImage& labels, int label, const LabelStats& st) {
  const int bw = st.max_x - st.min_x + 1;
  const int bh = st.max_y - st.min_y + 1;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(bw) * bh, 0);
  auto at = [&](int x, int y) -> std::uint8_t& {
    return seen[static_cast<std::size_t>(y - st.min_y) * bw + (x - st.min_x)];
  };
  std::vector<std::pair<int, int>> stack;
  for (int y = st.min_y; y <= st.max_y && stack.empty(); ++y) {
    for (int x = st.min_x; x <= st.max_x; ++x) {
      if (labels(x, y) == label) {
        stack.push_back({x, y});
        at(x, y) = 1;
        break;
      }
    }
  }
  std::size_t reached = 0;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    ++reached;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < st.min_x || ny < st.min_y || nx > st.max_x || ny > st.max_y) continue;
        if (labels(nx, ny) != label || at(nx, ny)) continue;
        at(nx, ny) = 1;
        stack.push_back({nx, ny});
      }
    }
  }
  return reached == st.pixels;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<MfInstance> extract_instances(const LabeledMask& labeled, TileOffset offset, MicronsPerPixel mpp) {
  std::vector<MfInstance> out;
  if (labeled.count == 0) return out;
  const auto& labels = labeled.labels;
  std::vector<LabelStats> stats(static_cast<std::size_t>(labeled.count) + 1);
  std::vector<std::vector<Point2>> corners(static_cast<std::size_t>(labeled.count) + 1);

  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const int l = labels(x, y);
      if (l == 0) continue;
      auto& st = stats[l];
      if (st.pixels == 0) {
        st.min_x = st.max_x = x;
        st.min_y = st.max_y = y;
      }
      ++st.pixels;
      st.min_x = std::min(st.min_x, x);
      st.max_x = std::max(st.max_x, x);
      st.min_y = std::min(st.min_y, y);
      st.max_y = std::max(st.max_y, y);
      // Interior pixels add nothing to the hull.
      auto same = [&](int u, int v) { return labels.contains(u, v) && labels(u, v) == l; };
      if (same(x - 1, y) && same(x + 1, y) && same(x, y - 1) && same(x, y + 1)) continue;
      auto& c = corners[l];
      const double fx = x, fy = y;
      c.push_back({fx, fy});
      c.push_back({fx + 1, fy});
      c.push_back({fx, fy + 1});
      c.push_back({fx + 1, fy + 1});
    }
  }

  out.reserve(static_cast<std::size_t>(labeled.count));
  for (int l = 1; l <= labeled.count; ++l) {
    MfInstance inst;
    inst.label = l;
    inst.pixel_count = stats[l].pixels;
    inst.min_rect = min_area_rect(corners[l]);
    inst.contour = single_piece(labels, l, stats[l]) ? trace_outer_contour(labels, l) : convex_hull(corners[l]);
    inst.center_fullres = inst.min_rect.center + Point2{static_cast<double>(offset.x), static_cast<double>(offset.y)};
    inst.width_um = inst.min_rect.longest_side() * mpp.value();
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<MfInstance> filter_small(std::span<const MfInstance> instances, MicronsPerPixel mpp,
                                     double min_width_um) {
  std::vector<MfInstance> kept;
  for (const auto& inst : instances) {
    const double width_um = inst.min_rect.longest_side() * mpp.value();
    // Closed threshold; the slack absorbs rounding in the calipers.
    if (width_um >= min_width_um - 1e-9) kept.push_back(inst);
  }
  return kept;
}

int interpolar_dilation_iterations(MicronsPerPixel mpp, double max_interpolar_um) {
  const double half_px = microns_to_pixels(max_interpolar_um / 2.0, mpp);
  return static_cast<int>(std::ceil(half_px - 1e-9));
}

LabeledMask merge_interpolar(const BinaryMask& mask, MicronsPerPixel mpp, double max_interpolar_um,
                             Connectivity connectivity) {
  if (mask.empty()) return {};
  const BinaryMask grown = morph::dilate(mask, interpolar_dilation_iterations(mpp, max_interpolar_um));
  const LabeledMask markers = label_instances(grown, connectivity);

  LabeledMask out;
  out.labels = LabelImage(mask.width(), mask.height(), 0);
  // Renumber in raster order of the original pixels.
  std::vector<int> dense(static_cast<std::size_t>(markers.count) + 1, 0);
  auto src = mask.pixels();
  auto mark = markers.labels.pixels();
  auto dst = out.labels.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == 0) continue;
    int& d = dense[mark[i]];
    if (d == 0) d = ++out.count;
    dst[i] = d;
  }
  return out;
}

std::vector<MfInstance> process_tile_mask(const BinaryMask& mask, TileOffset offset, MicronsPerPixel mpp,
                                          const TilePostprocessOptions& options) {
  const LabeledMask labeled = options.local_merge
                                  ? merge_interpolar(mask, mpp, options.max_interpolar_um, options.connectivity)
                                  : label_instances(mask, options.connectivity);
  const auto instances = extract_instances(labeled, offset, mpp);
  return filter_small(instances, mpp, options.min_width_um);
}

GlobalMerge merge_global(std::span<const Point2> centers, MicronsPerPixel mpp, double max_interpolar_um) {
  GlobalMerge result;
  const double radius = microns_to_pixels(max_interpolar_um, mpp);
  std::vector<std::vector<std::size_t>> members(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) members[i] = {i};
  std::vector<Point2> points(centers.begin(), centers.end());

  while (true) {
    ++result.passes;
    const KdTree2 tree(points);
    UnionFind uf(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (auto j : tree.radius_query(points[i], radius)) uf.unite(i, j);
    }
    // Roots are the smallest index of their group, so groups come out
    // ordered by first member.
    std::vector<std::vector<std::size_t>> next_members;
    std::vector<std::size_t> slot(points.size(), SIZE_MAX);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t root = uf.find(i);
      if (slot[root] == SIZE_MAX) {
        slot[root] = next_members.size();
        next_members.emplace_back();
      }
      auto& group = next_members[slot[root]];
      group.insert(group.end(), members[i].begin(), members[i].end());
    }
    const bool changed = next_members.size() != points.size();
    members = std::move(next_members);
    points.clear();
    for (auto& group : members) {
      std::sort(group.begin(), group.end());
      Point2 sum{};
      for (auto id : group) sum = sum + centers[id];
      const double n = static_cast<double>(group.size());
      points.push_back({sum.x / n, sum.y / n});
    }
    if (!changed) break;
  }
  result.centers = std::move(points);
  result.clusters = std::move(members);
  return result;
}

std::vector<Figure> assemble_figures(std::span<const MfInstance> instances, std::span<const TileOffset> offsets,
                                     MicronsPerPixel mpp, bool global_merge, double max_interpolar_um) {
  if (instances.size() != offsets.size()) {
    throw std::invalid_argument("assemble_figures: one tile offset per instance required");
  }
  auto fullres_contour = [&](std::size_t i) {
    std::vector<Point2> c = instances[i].contour;
    for (auto& p : c) p = p + Point2{static_cast<double>(offsets[i].x), static_cast<double>(offsets[i].y)};
    return c;
  };

  std::vector<Figure> figures;
  if (!global_merge) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      figures.push_back({static_cast<int>(i) + 1, instances[i].center_fullres, instances[i].width_um,
                         fullres_contour(i)});
    }
    return figures;
  }

  std::vector<Point2> centers;
  centers.reserve(instances.size());
  for (const auto& inst : instances) centers.push_back(inst.center_fullres);
  const GlobalMerge merged = merge_global(centers, mpp, max_interpolar_um);
  for (std::size_t k = 0; k < merged.clusters.size(); ++k) {
    const auto& group = merged.clusters[k];
    Figure f;
    f.id = static_cast<int>(k) + 1;
    f.center = merged.centers[k];
    if (group.size() == 1) {
      f.contour = fullres_contour(group.front());
      f.width_um = instances[group.front()].width_um;
    } else {
      std::vector<Point2> all;
      for (auto id : group) {
        auto c = fullres_contour(id);
        all.insert(all.end(), c.begin(), c.end());
        f.width_um = std::max(f.width_um, instances[id].width_um);
      }
      f.contour = convex_hull(all);
    }
    figures.push_back(std::move(f));
  }
  return figures;
}

}  // namespace mitocount
