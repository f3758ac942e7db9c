// Copyright 2026 The BadLane Authors
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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace badlane {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  auto operator<=>(const Rgb&) const = default;
};

struct PixelPos {
  int col = 0;
  int row = 0;
  auto operator<=>(const PixelPos&) const = default;
};

// 8-bit interleaved RGB raster, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool contains(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }

  Rgb at(int col, int row) const {
    const std::uint8_t* p = &data_[offset(col, row)];
    return {p[0], p[1], p[2]};
  }
  void set(int col, int row, Rgb c) {
    std::uint8_t* p = &data_[offset(col, row)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int col, int row) const {
    return (static_cast<std::size_t>(row) * width_ + col) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// PNG or JPEG, decoded to 8-bit RGB. Throws badlane::Error when unreadable.
Image read_image(const std::filesystem::path& path);
// Format chosen from the extension; PNG is lossless and byte-stable.
void write_image(const std::filesystem::path& path, const Image& image);

Image resize_bilinear(const Image& image, int width, int height);

double mean_intensity(const Image& image);

// Number of pixels whose RGB value differs between two equally sized images.
std::size_t count_differing_pixels(const Image& a, const Image& b);

}  // namespace badlane
