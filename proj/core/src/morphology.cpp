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

#include "mitocount/morphology.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace mitocount::morph {
namespace {

enum class Op { kAny, kAll };

// One separable pass along rows (horizontal=true) or columns. Window is
// [i-k, i+k] clipped to the raster; kAny -> max, kAll -> min over the clip.
BinaryMask window_pass(const BinaryMask& in, int k, Op op, bool horizontal) {
  BinaryMask out(in.width(), in.height());
  const int lines = horizontal ? in.height() : in.width();
  const int len = horizontal ? in.width() : in.height();
  std::vector<int> prefix(static_cast<std::size_t>(len) + 1);
  for (int line = 0; line < lines; ++line) {
    prefix[0] = 0;
    for (int i = 0; i < len; ++i) {
      const auto v = horizontal ? in(i, line) : in(line, i);
      prefix[i + 1] = prefix[i] + (v != 0 ? 1 : 0);
    }
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - k);
      const int hi = std::min(len - 1, i + k);
      const int ones = prefix[hi + 1] - prefix[lo];
      const bool set = op == Op::kAny ? ones > 0 : ones == hi - lo + 1;
      if (horizontal) {
        out(i, line) = set ? 1 : 0;
      } else {
        out(line, i) = set ? 1 : 0;
      }
    }
  }
  return out;
}

void check_iterations(int iterations) {
  if (iterations < 0) throw std::invalid_argument("morphology: negative iteration count");
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  check_iterations(iterations);
  if (iterations == 0 || mask.empty()) return mask;
  return window_pass(window_pass(mask, iterations, Op::kAny, true), iterations, Op::kAny, false);
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
  check_iterations(iterations);
  if (iterations == 0 || mask.empty()) return mask;
  return window_pass(window_pass(mask, iterations, Op::kAll, true), iterations, Op::kAll, false);
}

BinaryMask close(const BinaryMask& mask, int iterations) {
  return erode(dilate(mask, iterations), iterations);
}

BinaryMask blur_rethreshold(const BinaryMask& mask) {
  if (mask.empty()) return mask;
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      int ones = 0;
      int total = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!mask.contains(x + dx, y + dy)) continue;
          ++total;
          ones += mask(x + dx, y + dy) != 0 ? 1 : 0;
        }
      }
      // ones/total >= 0.5 without floating point
      out(x, y) = 2 * ones >= total ? 1 : 0;
    }
  }
  return out;
}

}  // namespace mitocount::morph
