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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "badlane/common.hpp"
#include "badlane/image.hpp"

namespace badlane {

// HSV box that decides whether a color counts as mud brown. Hue in degrees,
// saturation and value in [0, 1].
struct BrownPredicate {
  double hue_min = 10.0;
  double hue_max = 45.0;
  double sat_min = 0.25;
  double sat_max = 1.0;
  double val_min = 0.15;
  double val_max = 0.85;

  bool operator()(Rgb c) const;
  void validate() const;
};

struct Hsv {
  double hue = 0.0;  // degrees in [0, 360)
  double sat = 0.0;
  double val = 0.0;
};
Hsv to_hsv(Rgb c);
Rgb from_hsv(const Hsv& hsv);

// Sorted, duplicate-free set of brown shades.
struct ColorSet {
  std::vector<Rgb> colors;
  bool contains(Rgb c) const;
  std::size_t size() const { return colors.size(); }
};

ColorSet extract_color_set(std::span<const Image> patterns,
                           const BrownPredicate& predicate = {});

// Sidecar cache: the sorted colors as raw 3-byte triples.
void write_color_set(const std::filesystem::path& path, const ColorSet& colors);
ColorSet read_color_set(const std::filesystem::path& path);

struct MaskSpec {
  int width = 0;
  int height = 0;
  std::vector<PixelPos> cells;  // row-major order, distinct
};

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

// Star-shaped polygon around the region center with `vertices` corners at
// angles 2*pi*i/n, radius jittered in [0.4, 1.0] * min(w, h) / 2.
std::vector<Vertex> mask_polygon(int width, int height, int vertices, std::uint64_t seed);

// Cells whose centers fall inside the polygon (scan-line, even-odd rule).
std::vector<PixelPos> rasterize_polygon(std::span<const Vertex> polygon, int width,
                                        int height);

// Amorphous mask: filled random polygon with round(drop_fraction * filled)
// interior cells removed. Degenerate polygons are retried with a derived seed
// (16 attempts).
MaskSpec generate_mask(int width, int height, int vertices, double drop_fraction,
                       std::uint64_t seed);

// The whole w x h rectangle.
MaskSpec full_mask(int width, int height);

struct TriggerPixel {
  PixelPos pos;
  Rgb color;
  bool operator==(const TriggerPixel&) const = default;
};

struct TriggerPattern {
  int width = 0;
  int height = 0;
  std::vector<TriggerPixel> pixels;
  bool operator==(const TriggerPattern&) const = default;
};

// k distinct positions drawn without replacement from the mask, each with a
// color drawn with replacement from the color set.
TriggerPattern assemble_trigger(const MaskSpec& mask, const ColorSet& colors,
                                std::size_t k, std::uint64_t seed);

// Opaque composite; the input image is left untouched.
Image apply_trigger(const Image& image, const TriggerPattern& trigger, PixelPos origin);

// Uniform over every origin that keeps a w x h region inside the image.
PixelPos random_origin(int image_width, int image_height, int region_width,
                       int region_height, Rng& rng);

std::string trigger_to_json(const TriggerPattern& trigger);
TriggerPattern trigger_from_json(const std::string& text);

// Stand-in for photographed mud: brown blotches of varying shade over gray
// and green clutter.
Image make_mud_pattern(int width, int height, std::uint64_t seed);

}  // namespace badlane
