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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "badlane/dataset.hpp"
#include "badlane/eval.hpp"
#include "badlane/image.hpp"
#include "badlane/strategies.hpp"
#include "badlane/surrogate.hpp"
#include "badlane/trigger.hpp"

namespace badlane {

enum class VariantTag { origin, position, shape, viewpoint, size, sunlight, shadow, rain, snow };

inline constexpr VariantTag kAllVariantTags[] = {
    VariantTag::origin,    VariantTag::position, VariantTag::shape,
    VariantTag::viewpoint, VariantTag::size,     VariantTag::sunlight,
    VariantTag::shadow,    VariantTag::rain,     VariantTag::snow};

std::string_view variant_name(VariantTag tag);
VariantTag parse_variant(std::string_view name);

struct VariantSpec {
  VariantTag tag = VariantTag::origin;
  double scale = 1.0;      // size: pixel-count factor
  double jitter = 0.2;     // viewpoint: corner jitter as a fraction of the region
  double intensity = 0.5;  // weather tags
  int mask_vertices = 12;  // shape
  double mask_drop = 0.0;  // shape

  // "size@0.5" for size variants, the tag name otherwise.
  std::string label() const;
};

// origin, position, shape, viewpoint, size at 0.5 and 2.0, then the four
// weather conditions.
std::vector<VariantSpec> default_variants();

struct TriggerSource {
  TriggerPattern trigger;  // used as-is for origin, position, viewpoint and weather
  ColorSet colors;         // for regenerated shapes and sizes
};

// Centered horizontally, bottom edge one eighth of the frame above the bottom.
PixelPos canonical_origin(int image_width, int image_height, int region_width,
                          int region_height);

// Homography taking the unit-region corners (0,0), (w,0), (w,h), (0,h) onto
// `corners`; row-major 3x3 with h33 = 1.
std::array<double, 9> homography_from_corners(double width, double height,
                                              const std::array<Vertex, 4>& corners);

// The trigger pixels pushed through a seeded corner-jitter homography and
// re-rasterized (nearest source pixel). Result positions are relative to
// the returned pattern's region, whose top-left may lie before the original
// region; `shift` receives that offset.
TriggerPattern warp_trigger(const TriggerPattern& trigger, double jitter, std::uint64_t seed,
                            PixelPos* shift);

// Malicious test image for one variant.
Image make_variant(const Image& image, const TriggerSource& source, const VariantSpec& spec,
                   std::uint64_t seed);

// The trigger a size variant places: round(scale * k) pixels in a region
// scaled by sqrt(scale) per side.
TriggerPattern size_variant_trigger(const TriggerSource& source, double scale,
                                    std::uint64_t seed);

struct VariantResult {
  VariantSpec spec;
  std::vector<ImageRecord> predictions;
  MetricsReport report;
};

struct SuiteResult {
  MetricsReport clean;
  std::vector<ImageRecord> clean_predictions;
  std::vector<VariantResult> variants;
  // One row per tag; variants sharing a tag are averaged.
  std::vector<ReportRow> rows;
};

struct SuiteConfig {
  StrategyConfig strategy;
  double threshold = kDefaultThreshold;
  std::uint64_t seed = 0;
  int jobs = 1;
};

SuiteResult run_suite(const SurrogateModel& victim, std::span<const ImageRecord> records,
                      std::span<const Image> images, const TriggerSource& source,
                      std::span<const VariantSpec> specs, const SuiteConfig& cfg);

}  // namespace badlane
