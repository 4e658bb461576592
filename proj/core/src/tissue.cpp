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

#include "mitocount/tissue.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

#include "mitocount/morphology.hpp"

namespace mitocount {
namespace {

double srgb_to_linear(std::uint8_t c) noexcept {
  const double v = c / 255.0;
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// CIE f(t) with the standard linear segment near zero.
double lab_f(double t) noexcept {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

double lab_lightness(Rgb p) noexcept {
  // Relative luminance Y under D65 (Yn = 1).
  const double y = 0.2126729 * srgb_to_linear(p.r) + 0.7151522 * srgb_to_linear(p.g) +
                   0.0721750 * srgb_to_linear(p.b);
  return std::clamp(116.0 * lab_f(y) - 16.0, 0.0, 100.0);
}

GrayImage rgb_to_lab_l(const RgbImage& rgb) {
  if (rgb.empty()) throw std::invalid_argument("rgb_to_lab_l: empty image");
  std::array<double, 256> lin{};
  for (int i = 0; i < 256; ++i) lin[i] = srgb_to_linear(static_cast<std::uint8_t>(i));
  GrayImage out(rgb.width(), rgb.height());
  auto src = rgb.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double y = 0.2126729 * lin[src[i].r] + 0.7151522 * lin[src[i].g] + 0.0721750 * lin[src[i].b];
    const double l = std::clamp(116.0 * lab_f(y) - 16.0, 0.0, 100.0);
    dst[i] = static_cast<std::uint8_t>(std::lround(l * 255.0 / 100.0));
  }
  return out;
}

OtsuResult otsu_threshold(std::span<const std::uint64_t> hist) {
  using boost::multiprecision::cpp_int;
  if (hist.size() != 256) throw std::invalid_argument("otsu_threshold: histogram must have 256 bins");

  // Arbitrary precision: with uint64 bins, s0 * total can exceed 128 bits.
  cpp_int total = 0;
  cpp_int total_sum = 0;
  int populated = 0;
  int last_bin = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += cpp_int(hist[i]) * i;
    if (hist[i] != 0) {
      ++populated;
      last_bin = i;
    }
  }
  if (total == 0) throw std::invalid_argument("otsu_threshold: empty histogram");
  if (populated == 1) return {last_bin, true};

  // sigma_b^2(t) = (S0*N - S*n0)^2 / (N^2 * n0 * n1); the N^2 is common.
  cpp_int best_num = -1;
  cpp_int best_den = 1;
  int best_t = 0;
  cpp_int n0 = 0;
  cpp_int s0 = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += hist[t];
    s0 += cpp_int(hist[t]) * t;
    const cpp_int n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const cpp_int d = s0 * total - total_sum * n0;
    const cpp_int num = d * d;
    const cpp_int den = n0 * n1;
    if (best_num < 0 || num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_t = t;
    }
  }
  return {best_t, false};
}

BinaryMask refine_mask(const BinaryMask& mask, const RefineOptions& options) {
  BinaryMask out = morph::close(mask, options.close_iterations);
  if (options.blur) out = morph::blur_rethreshold(out);
  return out;
}

BinaryMask detect_tissue(const RgbImage& low_res, const RefineOptions& options) {
  const GrayImage l = rgb_to_lab_l(low_res);
  const auto otsu = otsu_threshold(histogram(l));
  BinaryMask mask(l.width(), l.height());
  auto src = l.pixels();
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = (src[i] <= otsu.threshold && src[i] < kBackgroundLightness) ? 1 : 0;
  }
  return refine_mask(mask, options);
}

std::vector<double> tile_coverage(const BinaryMask& mask, SlideDims slide, int window_px) {
  if (window_px <= 0) throw std::invalid_argument("tile_coverage: window must be positive");
  if (slide.width_px <= 0 || slide.height_px <= 0) {
    throw std::invalid_argument("tile_coverage: slide dimensions must be positive");
  }
  if (mask.empty()) throw std::invalid_argument("tile_coverage: empty mask");
  const int cols = (slide.width_px + window_px - 1) / window_px;
  const int rows = (slide.height_px + window_px - 1) / window_px;
  const double sx = static_cast<double>(slide.width_px) / mask.width();
  const double sy = static_cast<double>(slide.height_px) / mask.height();

  std::vector<double> tissue_area(static_cast<std::size_t>(cols) * rows, 0.0);
  // Split each mask pixel's full-resolution footprint along tile borders.
  auto spans = [window_px](double a, double b, int count, auto&& fn) {
    int i = std::clamp(static_cast<int>(std::floor(a / window_px)), 0, count - 1);
    while (a < b && i < count) {
      const double edge = std::min(b, static_cast<double>(i + 1) * window_px);
      if (edge > a) fn(i, edge - a);
      a = edge;
      ++i;
    }
  };
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (mask(u, v) == 0) continue;
      spans(v * sy, (v + 1) * sy, rows, [&](int row, double hy) {
        spans(u * sx, (u + 1) * sx, cols, [&](int col, double hx) {
          tissue_area[static_cast<std::size_t>(row) * cols + col] += hx * hy;
        });
      });
    }
  }
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      const double w = std::min(window_px, slide.width_px - col * window_px);
      const double h = std::min(window_px, slide.height_px - row * window_px);
      auto& a = tissue_area[static_cast<std::size_t>(row) * cols + col];
      a = std::min(1.0, a / (w * h));
    }
  }
  return tissue_area;
}

TileGrid tissue_tiles(const BinaryMask& mask, SlideDims slide, const TileOptions& options) {
  if (!(options.min_coverage >= 0.0 && options.min_coverage <= 1.0)) {
    throw std::invalid_argument("tissue_tiles: coverage threshold must lie in [0,1]");
  }
  const auto coverage = tile_coverage(mask, slide, options.window_px);
  TileGrid grid;
  grid.window_px = options.window_px;
  grid.scale_x = static_cast<double>(slide.width_px) / mask.width();
  grid.scale_y = static_cast<double>(slide.height_px) / mask.height();
  grid.columns = (slide.width_px + options.window_px - 1) / options.window_px;
  grid.rows = (slide.height_px + options.window_px - 1) / options.window_px;
  grid.padded_width = grid.columns * options.window_px;
  grid.padded_height = grid.rows * options.window_px;
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.columns; ++col) {
      const double c = coverage[static_cast<std::size_t>(row) * grid.columns + col];
      // Zero coverage never qualifies, even with a zero threshold.
      if (c > 0.0 && c >= options.min_coverage) {
        grid.tiles.push_back({col * options.window_px, row * options.window_px});
      }
    }
  }
  return grid;
}

}  // namespace mitocount
