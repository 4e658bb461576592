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

/// @file units.hpp
/// @brief Physical units, 2-D points and the Chebyshev (L-infinity) metric.
///
/// All region geometry is expressed in full-resolution pixel coordinates.
/// Physical thresholds (microns, mm^2) are converted to pixels once per
/// slide through MicronsPerPixel.

#include <cmath>
#include <compare>

namespace mitocount {

/// Scan resolution in micrometres per pixel at full resolution.
class MicronsPerPixel {
 public:
  /// Throws std::invalid_argument unless value is finite and > 0.
  explicit MicronsPerPixel(double value);

  [[nodiscard]] double value() const noexcept { return value_; }

  friend bool operator==(MicronsPerPixel, MicronsPerPixel) = default;

 private:
  double value_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }

[[nodiscard]] inline bool is_finite(Point2 p) noexcept {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

/// Area of the standard 10 high-power-field reporting region.
inline constexpr double kHpfAreaMm2 = 2.37;

/// Square 10HPF region expressed in pixels for one scan resolution.
struct HpfGeometry {
  double area_mm2 = kHpfAreaMm2;
  double side_px = 0.0;
  double radius_px = 0.0;  // side_px / 2, the Chebyshev radius
};

/// um / mpp. Throws std::invalid_argument for negative or non-finite um.
[[nodiscard]] double microns_to_pixels(double um, MicronsPerPixel mpp);

/// side_px = sqrt(area_mm2 * 1e6 um^2) / mpp, kept as a real number.
[[nodiscard]] HpfGeometry hpf_geometry(MicronsPerPixel mpp, double area_mm2 = kHpfAreaMm2);

/// max(|dx|, |dy|).
[[nodiscard]] double chebyshev(Point2 a, Point2 b);

[[nodiscard]] double euclidean(Point2 a, Point2 b) noexcept;

}  // namespace mitocount
