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

#include "mitocount/image.hpp"

#include <algorithm>
#include <cmath>

namespace mitocount {

std::size_t count_true(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

std::vector<std::uint64_t> histogram(const GrayImage& image) {
  std::vector<std::uint64_t> bins(256, 0);
  for (auto v : image.pixels()) ++bins[v];
  return bins;
}

RgbImage resize_area(const RgbImage& src, int width, int height) {
  if (src.empty()) throw std::invalid_argument("resize_area: empty source");
  RgbImage out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    const int y0 = static_cast<int>(std::floor(y * sy));
    const int y1 = std::max(y0 + 1, std::min(src.height(), static_cast<int>(std::ceil((y + 1) * sy))));
    for (int x = 0; x < width; ++x) {
      const int x0 = static_cast<int>(std::floor(x * sx));
      const int x1 = std::max(x0 + 1, std::min(src.width(), static_cast<int>(std::ceil((x + 1) * sx))));
      unsigned long r = 0, g = 0, b = 0, n = 0;
      for (int v = y0; v < y1; ++v) {
        for (int u = x0; u < x1; ++u) {
          const Rgb& p = src(std::min(u, src.width() - 1), std::min(v, src.height() - 1));
          r += p.r;
          g += p.g;
          b += p.b;
          ++n;
        }
      }
      out(x, y) = Rgb{static_cast<std::uint8_t>((r + n / 2) / n), static_cast<std::uint8_t>((g + n / 2) / n),
                      static_cast<std::uint8_t>((b + n / 2) / n)};
    }
  }
  return out;
}

}  // namespace mitocount
