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


#include <gtest/gtest.h>

#include <map>

#include "badlane/common.hpp"
#include "badlane/environment.hpp"

namespace badlane {
namespace {

Image textured(int w, int h) {
  Image img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      img.set(c, r, {static_cast<std::uint8_t>(60 + (c * 7 + r * 3) % 120),
                     static_cast<std::uint8_t>(90 + (c * 5) % 80),
                     static_cast<std::uint8_t>(70 + (r * 11) % 100)});
  return img;
}

TEST(Condition, NoneAndZeroIntensityAreIdentity) {
  const Image img = textured(80, 60);
  EXPECT_EQ(apply_condition(img, {EnvKind::none, 1.0, 3}), img);
  for (EnvKind k : kWeatherKinds) EXPECT_EQ(apply_condition(img, {k, 0.0, 3}), img);
}

TEST(Condition, BrightnessDirection) {
  const Image gray(96, 64, {128, 128, 128});
  const double base = mean_intensity(gray);
  EXPECT_GT(mean_intensity(apply_condition(gray, {EnvKind::sunlight, 1.0, 1})), base);
  EXPECT_LT(mean_intensity(apply_condition(gray, {EnvKind::shadow, 1.0, 1})), base);
  EXPECT_GT(mean_intensity(apply_condition(gray, {EnvKind::snow, 1.0, 1})), base);
  EXPECT_GT(count_differing_pixels(gray, apply_condition(gray, {EnvKind::rain, 1.0, 1})), 0u);
}

TEST(Condition, DeterministicAndShapePreserving) {
  const Image img = textured(70, 50);
  for (EnvKind k : kWeatherKinds) {
    const auto a = apply_condition(img, {k, 0.7, 11});
    EXPECT_EQ(a, apply_condition(img, {k, 0.7, 11}));
    EXPECT_EQ(a.width(), 70);
    EXPECT_EQ(a.height(), 50);
    EXPECT_NE(a, img) << env_name(k);
  }
}

TEST(Condition, RegionRestricted) {
  const Image img = textured(64, 64);
  for (EnvKind k : kWeatherKinds) {
    const auto out = apply_condition_in_region(img, {k, 1.0, 5}, {10, 20}, 24, 24);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) {
        const bool inside = c >= 10 && c < 34 && r >= 20 && r < 44;
        if (!inside) {
          ASSERT_EQ(out.at(c, r), img.at(c, r)) << env_name(k);
        }
      }
    EXPECT_GT(count_differing_pixels(img, out), 0u) << env_name(k);
  }
}

TEST(Condition, FixedCompositionOrder) {
  const Image img = textured(64, 48);
  const std::vector<EnvCondition> a{{EnvKind::snow, 0.5, 1}, {EnvKind::sunlight, 0.5, 2}},
      b{{EnvKind::sunlight, 0.5, 2}, {EnvKind::snow, 0.5, 1}};
  EXPECT_EQ(apply_conditions(img, a), apply_conditions(img, b));
  const auto manual =
      apply_condition(apply_condition(img, {EnvKind::sunlight, 0.5, 2}), {EnvKind::snow, 0.5, 1});
  EXPECT_EQ(apply_conditions(img, a), manual);
}

TEST(Sampling, ExtremeProbabilities) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_TRUE(sample_conditions(0.0, s).empty());
    const auto all = sample_conditions(1.0, s);
    ASSERT_EQ(all.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(all[i].kind, kWeatherKinds[i]);
  }
  EXPECT_THROW(sample_conditions(1.5, 0), Error);
}

TEST(Sampling, PerTypeFrequency) {
  std::map<EnvKind, int> hits;
  constexpr int kSeeds = 10000;
  for (std::uint64_t s = 0; s < kSeeds; ++s)
    for (const auto& c : sample_conditions(0.15, s)) ++hits[c.kind];
  for (EnvKind k : kWeatherKinds) {
    const double f = static_cast<double>(hits[k]) / kSeeds;
    EXPECT_NEAR(f, 0.15, 0.01) << env_name(k);
  }
}

TEST(Sampling, DeterministicAndTagged) {
  EXPECT_EQ(sample_conditions(0.5, 42, 0.3), sample_conditions(0.5, 42, 0.3));
  const std::vector<EnvCondition> c{{EnvKind::sunlight, 0.5, 0}, {EnvKind::rain, 0.5, 0}};
  EXPECT_EQ(conditions_tag(c), "sunlight+rain");
  EXPECT_EQ(conditions_tag({}), "none");
  EXPECT_EQ(parse_env_kind("snow"), EnvKind::snow);
  EXPECT_THROW(parse_env_kind("fog"), Error);
}

}  // namespace
}  // namespace badlane
