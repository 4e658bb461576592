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

#include "mitocount/png_io.hpp"

#include <png.h>

#include <cstring>
#include <string>

#include "mitocount/error.hpp"

namespace mitocount {
namespace {

template <typename Pixel>
Raster<Pixel> read_as(const std::filesystem::path& path, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = format;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw IoError("empty PNG " + path.string());
  }
  Raster<Pixel> out(static_cast<int>(image.width), static_cast<int>(image.height));
  static_assert(sizeof(Pixel) == 1 || sizeof(Pixel) == 3);
  if (png_image_finish_read(&image, nullptr, out.pixels().data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

template <typename Pixel>
void write_as(const std::filesystem::path& path, const Raster<Pixel>& raster, png_uint_32 format) {
  if (raster.empty()) throw IoError("refusing to write empty image to " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = format;
  image.flags = PNG_IMAGE_FLAG_FAST;
  if (png_image_write_to_file(&image, path.c_str(), 0, raster.pixels().data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
}

}  // namespace

RgbImage read_png_rgb(const std::filesystem::path& path) { return read_as<Rgb>(path, PNG_FORMAT_RGB); }

GrayImage read_png_gray(const std::filesystem::path& path) {
  return read_as<std::uint8_t>(path, PNG_FORMAT_GRAY);
}

void write_png(const std::filesystem::path& path, const RgbImage& image) { write_as(path, image, PNG_FORMAT_RGB); }

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_as(path, image, PNG_FORMAT_GRAY);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage g(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = g.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 255 : 0;
  write_png(path, g);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  GrayImage g = read_png_gray(path);
  for (auto& v : g.pixels()) v = v != 0 ? 1 : 0;
  return g;
}

}  // namespace mitocount
