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

#include "mitocount/units.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mitocount {

MicronsPerPixel::MicronsPerPixel(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw std::invalid_argument("microns-per-pixel must be finite and positive, got " +
                                std::to_string(value));
  }
}

double microns_to_pixels(double um, MicronsPerPixel mpp) {
  if (!std::isfinite(um)) throw std::invalid_argument("microns_to_pixels: non-finite length");
  if (um < 0.0) throw std::invalid_argument("microns_to_pixels: negative length");
  return um / mpp.value();
}

HpfGeometry hpf_geometry(MicronsPerPixel mpp, double area_mm2) {
  if (!std::isfinite(area_mm2) || area_mm2 <= 0.0) {
    throw std::invalid_argument("hpf_geometry: area must be finite and positive");
  }
  HpfGeometry g;
  g.area_mm2 = area_mm2;
  g.side_px = std::sqrt(area_mm2 * 1.0e6) / mpp.value();
  g.radius_px = g.side_px / 2.0;
  return g;
}

double chebyshev(Point2 a, Point2 b) {
  if (!is_finite(a) || !is_finite(b)) throw std::invalid_argument("chebyshev: non-finite point");
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

double euclidean(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace mitocount
