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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mitocount/units.hpp"

namespace mitocount {

struct AnnotatedFigure {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double width_um = 0.0;
  std::vector<Point2> contour;
  friend bool operator==(const AnnotatedFigure&, const AnnotatedFigure&) = default;
};

struct AnnotatedHpf {
  Point2 center;
  double side_px = 0.0;
  int count = 0;
  std::vector<int> member_ids;
  friend bool operator==(const AnnotatedHpf&, const AnnotatedHpf&) = default;
};

struct AnnotationDoc {
  std::string slide_id;
  double mpp = 0.25;
  std::vector<AnnotatedFigure> figures;
  std::optional<AnnotatedHpf> hpf;
  friend bool operator==(const AnnotationDoc&, const AnnotationDoc&) = default;
};

/// Coordinates and lengths are stored with 3 decimals, mpp with 6.
inline constexpr int kCoordinateDecimals = 3;
inline constexpr int kMppDecimals = 6;

/// The document as it reads back after serialization.
[[nodiscard]] AnnotationDoc quantized(const AnnotationDoc& doc);

/// Throws ParseError naming the offending element.
void validate(const AnnotationDoc& doc);

[[nodiscard]] std::string annotation_to_xml(const AnnotationDoc& doc);
[[nodiscard]] AnnotationDoc annotation_from_xml(const std::string& xml);

void write_annotation_xml(const AnnotationDoc& doc, const std::filesystem::path& path);
[[nodiscard]] AnnotationDoc read_annotation_xml(const std::filesystem::path& path);

}  // namespace mitocount
