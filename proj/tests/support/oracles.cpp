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

#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include <unistd.h>

#include <boost/multiprecision/cpp_int.hpp>

namespace mitocount::testing {

namespace mp = boost::multiprecision;

LabeledMask flood_fill_label(const BinaryMask& mask, Connectivity connectivity) {
  LabeledMask out;
  out.labels = LabelImage(mask.width(), mask.height(), 0);
  std::vector<std::pair<int, int>> steps{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  if (connectivity == Connectivity::kEight) steps.insert(steps.end(), {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) == 0 || out.labels(x, y) != 0) continue;
      const int label = ++out.count;
      std::queue<std::pair<int, int>> todo;
      todo.push({x, y});
      out.labels(x, y) = label;
      while (!todo.empty()) {
        auto [cx, cy] = todo.front();
        todo.pop();
        for (auto [dx, dy] : steps) {
          const int nx = cx + dx, ny = cy + dy;
          if (mask.contains(nx, ny) && mask(nx, ny) != 0 && out.labels(nx, ny) == 0) {
            out.labels(nx, ny) = label;
            todo.push({nx, ny});
          }
        }
      }
    }
  }
  return out;
}

namespace {

BinaryMask step(const BinaryMask& in, bool dilate) {
  BinaryMask out(in.width(), in.height(), 0);
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      bool any = false, all = true;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const bool v = in.contains(x + dx, y + dy) ? in(x + dx, y + dy) != 0 : !dilate;
          any = any || v;
          all = all && v;
        }
      }
      out(x, y) = (dilate ? any : all) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

BinaryMask naive_dilate(const BinaryMask& mask, int iterations) {
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = step(m, true);
  return m;
}

BinaryMask naive_erode(const BinaryMask& mask, int iterations) {
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = step(m, false);
  return m;
}

BinaryMask naive_blur(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      int on = 0, total = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!mask.contains(x + dx, y + dy)) continue;
          ++total;
          on += mask(x + dx, y + dy) != 0 ? 1 : 0;
        }
      }
      out(x, y) = static_cast<double>(on) / total >= 0.5 ? 1 : 0;
    }
  }
  return out;
}

int exhaustive_otsu(std::span<const std::uint64_t> histogram) {
  int populated = 0, only = 0;
  for (int i = 0; i < static_cast<int>(histogram.size()); ++i) {
    if (histogram[i] != 0) {
      ++populated;
      only = i;
    }
  }
  if (populated == 1) return only;
  // sigma_b^2(t) = w0 w1 (mu0 - mu1)^2 = (n1 S0 - n0 S1)^2 / (N^2 n0 n1); the
  // common N^2 is dropped and fractions are compared as exact rationals.
  mp::cpp_rational best = -1;
  int best_t = 0;
  for (int t = 0; t < static_cast<int>(histogram.size()); ++t) {
    mp::cpp_int n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int i = 0; i < static_cast<int>(histogram.size()); ++i) {
      const mp::cpp_int c = histogram[i];
      if (i <= t) {
        n0 += c;
        s0 += c * i;
      } else {
        n1 += c;
        s1 += c * i;
      }
    }
    mp::cpp_rational v = 0;
    if (n0 != 0 && n1 != 0) {
      const mp::cpp_int d = n1 * s0 - n0 * s1;
      v = mp::cpp_rational(d * d, n0 * n1);
    }
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

double brute_min_rect_area(std::span<const Point2> points) {
  double best = std::numeric_limits<double>::infinity();
  auto area_along = [&](double ux, double uy) {
    double lo_u = INFINITY, hi_u = -INFINITY, lo_v = INFINITY, hi_v = -INFINITY;
    for (const auto& p : points) {
      const double u = p.x * ux + p.y * uy;
      const double v = -p.x * uy + p.y * ux;
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
    return (hi_u - lo_u) * (hi_v - lo_v);
  };
  best = area_along(1.0, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[j].x - points[i].x, dy = points[j].y - points[i].y;
      const double len = std::hypot(dx, dy);
      if (len == 0.0) continue;
      best = std::min(best, area_along(dx / len, dy / len));
    }
  }
  return best;
}

std::vector<std::size_t> linear_range(std::span<const Point2> points, Point2 center, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::max(std::abs(points[i].x - center.x), std::abs(points[i].y - center.y)) <= r) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> brute_merge_clusters(std::span<const Point2> points, double r_px) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < points.size(); ++i) clusters.push_back({i});
  auto centroid = [&](const std::vector<std::size_t>& members) {
    Point2 sum{};
    for (auto id : members) sum = sum + points[id];
    return Point2{sum.x / static_cast<double>(members.size()), sum.y / static_cast<double>(members.size())};
  };
  for (;;) {
    std::vector<Point2> centers;
    for (const auto& c : clusters) centers.push_back(centroid(c));
    std::vector<std::size_t> parent(clusters.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a];
      return a;
    };
    bool linked = false;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      for (std::size_t j = i + 1; j < centers.size(); ++j) {
        if (euclidean(centers[i], centers[j]) > r_px) continue;
        const auto a = find(i), b = find(j);
        if (a != b) {
          parent[std::max(a, b)] = std::min(a, b);
          linked = true;
        }
      }
    }
    if (!linked) break;
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      auto& g = groups[find(i)];
      g.insert(g.end(), clusters[i].begin(), clusters[i].end());
    }
    clusters.clear();
    for (auto& [root, members] : groups) {
      std::sort(members.begin(), members.end());
      clusters.push_back(std::move(members));
    }
    std::sort(clusters.begin(), clusters.end());
  }
  return clusters;
}

std::size_t grid_sweep_best(std::span<const Point2> points, double r, double pitch) {
  double lo_x = INFINITY, lo_y = INFINITY, hi_x = -INFINITY, hi_y = -INFINITY;
  for (const auto& p : points) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  std::size_t best = 0;
  const auto nx = static_cast<long>(std::ceil((hi_x - lo_x + 2 * r) / pitch));
  const auto ny = static_cast<long>(std::ceil((hi_y - lo_y + 2 * r) / pitch));
  for (long i = 0; i <= nx; ++i) {
    for (long j = 0; j <= ny; ++j) {
      const Point2 c{lo_x - r + static_cast<double>(i) * pitch, lo_y - r + static_cast<double>(j) * pitch};
      best = std::max(best, linear_range(points, c, r).size());
    }
  }
  return best;
}

BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  BinaryMask m(width, height, 0);
  for (auto& v : m.pixels()) v = on(rng) ? 1 : 0;
  return m;
}

AnnotationDoc random_annotation(std::mt19937_64& rng, int max_figures, bool on_grid) {
  static const std::string kIdChars = "abcXYZ019_-.&<>\"'";
  std::uniform_int_distribution<int> id_len(1, 12), n_fig(0, max_figures), n_contour(0, 24);
  std::uniform_real_distribution<double> coord(-2e5, 2e5), width(0.0, 40.0), mpp(0.05, 4.0);
  std::uniform_int_distribution<std::size_t> pick(0, kIdChars.size() - 1);
  auto value = [&](double v) { return on_grid ? std::round(v * 1000.0) / 1000.0 : v; };

  AnnotationDoc doc;
  for (int i = id_len(rng); i > 0; --i) doc.slide_id += kIdChars[pick(rng)];
  doc.mpp = on_grid ? std::round(mpp(rng) * 1e6) / 1e6 : mpp(rng);
  std::uniform_int_distribution<int> id_step(1, 5);
  int id = 0;
  for (int i = n_fig(rng); i > 0; --i) {
    AnnotatedFigure f;
    id += id_step(rng);
    f.id = id;
    f.x = value(coord(rng));
    f.y = value(coord(rng));
    f.width_um = value(width(rng));
    for (int k = n_contour(rng); k > 0; --k) f.contour.push_back({value(coord(rng)), value(coord(rng))});
    doc.figures.push_back(std::move(f));
  }
  if (std::bernoulli_distribution(0.7)(rng)) {
    AnnotatedHpf h;
    h.center = {value(coord(rng)), value(coord(rng))};
    h.side_px = value(std::uniform_real_distribution<double>(1.0, 7000.0)(rng));
    for (const auto& f : doc.figures) {
      if (std::bernoulli_distribution(0.5)(rng)) h.member_ids.push_back(f.id);
    }
    h.count = static_cast<int>(h.member_ids.size());
    doc.hpf = h;
  }
  return doc;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

}  // namespace mitocount::testing
