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

#include "mitocount/image.hpp"

namespace mitocount {

enum class Connectivity { kFour = 4, kEight = 8 };

/// Instance labels: 0 is background, objects are numbered 1..count in the
/// raster order of their first pixel.
struct LabeledMask {
  LabelImage labels;
  int count = 0;

  [[nodiscard]] int width() const noexcept { return labels.width(); }
  [[nodiscard]] int height() const noexcept { return labels.height(); }
};

/// Connected-component labelling (two raster passes with union-find).
[[nodiscard]] LabeledMask label_instances(const BinaryMask& mask,
                                          Connectivity connectivity = Connectivity::kEight);

/// Throws std::invalid_argument for anything other than 4 or 8.
[[nodiscard]] Connectivity connectivity_from_int(int value);

}  // namespace mitocount
