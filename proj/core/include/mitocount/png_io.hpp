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

#include "mitocount/image.hpp"

namespace mitocount {

/// Any PNG colour type, converted to 8-bit RGB. Throws IoError.
[[nodiscard]] RgbImage read_png_rgb(const std::filesystem::path& path);
/// Any PNG colour type, converted to 8-bit gray. Throws IoError.
[[nodiscard]] GrayImage read_png_gray(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// Stored as gray 0/255; reading treats any nonzero value as set.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
[[nodiscard]] BinaryMask read_mask_png(const std::filesystem::path& path);

}  // namespace mitocount
