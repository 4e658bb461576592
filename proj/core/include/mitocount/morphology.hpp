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

/// @file morphology.hpp
/// @brief Binary morphology with a 3x3 square structuring element.
///
/// `iterations` applications of the 3x3 element equal one application of a
/// (2k+1)x(2k+1) square, which is how these are computed (separable running
/// window, O(width*height) independent of k). Pixels outside the raster are
/// background for dilation and foreground for erosion, so the two operators
/// are adjoint on the finite grid and closing is idempotent.

#include "mitocount/image.hpp"

namespace mitocount::morph {

[[nodiscard]] BinaryMask dilate(const BinaryMask& mask, int iterations = 1);
[[nodiscard]] BinaryMask erode(const BinaryMask& mask, int iterations = 1);

/// dilate then erode.
[[nodiscard]] BinaryMask close(const BinaryMask& mask, int iterations = 1);

/// 3x3 box mean of the 0/1 field over in-bounds neighbours, kept where >= 0.5.
[[nodiscard]] BinaryMask blur_rethreshold(const BinaryMask& mask);

}  // namespace mitocount::morph
