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

#include <algorithm>
#include <cmath>
#include <queue>
#include <fstream>
#include <set>

#include "badlane/trigger.hpp"
#include "test_support.hpp"

namespace badlane {
namespace {

// Default brown rule in exact integer arithmetic: hue in [10, 45] degrees
// only happens with red as the maximum and green >= blue, where
// hue = 60 (g - b) / (r - b).
bool brown_by_hand(Rgb c) {
  const long r = c.r, g = c.g, b = c.b;
  if (r < g || r < b || g < b || r == b) return false;
  const long d = r - b;
  return 6 * (g - b) >= d && 4 * (g - b) <= 3 * d && 4 * d >= r && 100 * r >= 15 * 255 &&
         100 * r <= 85 * 255;
}

// True when some comparison in brown_by_hand is an exact tie, where
// floating-point evaluation may fall either way.
bool on_boundary(Rgb c) {
  const long r = c.r, g = c.g, b = c.b, d = r - b;
  return 6 * (g - b) == d || 4 * (g - b) == 3 * d || 4 * d == r || 100 * r == 15 * 255 ||
         100 * r == 85 * 255;
}

// Crossing-number test at (x, y).
bool inside_polygon(const std::vector<Vertex>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vertex& a = poly[i];
    const Vertex& b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < xc) in = !in;
    }
  }
  return in;
}

ColorSet test_colors() {
  std::vector<Image> pats;
  for (int i = 0; i < 3; ++i) pats.push_back(make_mud_pattern(64, 64, 40 + i));
  return extract_color_set(pats);
}

TEST(ColorSet, HandComputedTwoByTwo) {
  Image img(2, 2);
  img.set(0, 0, {139, 90, 43});
  img.set(1, 0, {0, 0, 255});
  img.set(0, 1, {139, 90, 43});
  img.set(1, 1, {120, 80, 40});
  std::vector<Rgb> expected;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (brown_by_hand(img.at(c, r))) expected.push_back(img.at(c, r));
  std::sort(expected.begin(), expected.end());
  expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
  const auto set = extract_color_set(std::span<const Image>(&img, 1));
  EXPECT_EQ(set.colors, expected);
  EXPECT_EQ(set.colors, (std::vector<Rgb>{{120, 80, 40}, {139, 90, 43}}));
}

TEST(ColorSet, AllBlueFails) {
  Image img(4, 4, {0, 0, 255});
  try {
    extract_color_set(std::span<const Image>(&img, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no brown pixels found");
  }
}

TEST(ColorSet, EveryColorPassesPredicateAndOracle) {
  const auto set = test_colors();
  ASSERT_GT(set.size(), 10u);
  const BrownPredicate pred;
  for (Rgb c : set.colors) {
    EXPECT_TRUE(pred(c));
    EXPECT_TRUE(brown_by_hand(c));
  }
  EXPECT_TRUE(std::is_sorted(set.colors.begin(), set.colors.end()));
  EXPECT_EQ(std::adjacent_find(set.colors.begin(), set.colors.end()), set.colors.end());
}

TEST(ColorSet, PredicateAgreesWithOracleOnAllSampledColors) {
  const BrownPredicate pred;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20000; ++i) {
    const Rgb c{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                static_cast<std::uint8_t>(rng())};
    if (on_boundary(c)) continue;
    ASSERT_EQ(pred(c), brown_by_hand(c)) << int(c.r) << "," << int(c.g) << "," << int(c.b);
  }
}

TEST(ColorSet, FileRoundTripAndValidation) {
  testing::TempDir dir("colors");
  const auto set = test_colors();
  write_color_set(dir / "c.bin", set);
  EXPECT_EQ(std::filesystem::file_size(dir / "c.bin"), 3 * set.size());
  EXPECT_EQ(read_color_set(dir / "c.bin").colors, set.colors);
  {
    std::ofstream f(dir / "bad.bin", std::ios::binary);
    f.write("\x05\x05\x05\x01\x01\x01", 6);
  }
  EXPECT_THROW(read_color_set(dir / "bad.bin"), Error);
}

TEST(Hsv, RoundTripsThroughRgb) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    const Rgb c{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                static_cast<std::uint8_t>(rng())};
    EXPECT_EQ(from_hsv(to_hsv(c)), c);
  }
}

TEST(Mask, CellsAreExactlyPolygonInterior) {
  for (std::uint64_t seed : {1u, 2u, 3u, 17u, 99u}) {
    const auto poly = mask_polygon(100, 100, 12, seed);
    const auto mask = generate_mask(100, 100, 12, 0.0, seed);
    std::set<PixelPos> cells(mask.cells.begin(), mask.cells.end());
    ASSERT_EQ(cells.size(), mask.cells.size());
    for (int r = 0; r < 100; ++r)
      for (int c = 0; c < 100; ++c)
        ASSERT_EQ(cells.count({c, r}) == 1, inside_polygon(poly, c + 0.5, r + 0.5))
            << "seed " << seed << " cell " << c << "," << r;
  }
}

TEST(Mask, FilledPolygonIsConnected) {
  const auto mask = generate_mask(100, 100, 12, 0.0, 5);
  std::set<PixelPos> cells(mask.cells.begin(), mask.cells.end());
  std::set<PixelPos> seen{mask.cells.front()};
  std::queue<PixelPos> q;
  q.push(mask.cells.front());
  while (!q.empty()) {
    const PixelPos p = q.front();
    q.pop();
    for (PixelPos d : {PixelPos{1, 0}, PixelPos{-1, 0}, PixelPos{0, 1}, PixelPos{0, -1}}) {
      const PixelPos n{p.col + d.col, p.row + d.row};
      if (cells.count(n) && seen.insert(n).second) q.push(n);
    }
  }
  EXPECT_EQ(seen.size(), cells.size());
}

TEST(Mask, DropKeepsExactCount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto full = generate_mask(100, 100, 12, 0.0, seed);
    const auto dropped = generate_mask(100, 100, 12, 0.3, seed);
    EXPECT_EQ(dropped.cells.size(),
              static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(full.cells.size()))));
    std::set<PixelPos> all(full.cells.begin(), full.cells.end());
    for (const auto& c : dropped.cells) EXPECT_TRUE(all.count(c));
  }
}

TEST(Mask, DeterministicAndValidated) {
  EXPECT_EQ(generate_mask(40, 30, 8, 0.2, 9).cells, generate_mask(40, 30, 8, 0.2, 9).cells);
  EXPECT_THROW(generate_mask(3, 30, 8, 0.0, 1), Error);
  EXPECT_THROW(generate_mask(30, 30, 2, 0.0, 1), Error);
  EXPECT_THROW(generate_mask(30, 30, 33, 0.0, 1), Error);
  EXPECT_THROW(generate_mask(30, 30, 8, 1.0, 1), Error);
}

TEST(Assemble, NineHundredInSquare) {
  const auto colors = test_colors();
  const auto t = assemble_trigger(full_mask(100, 100), colors, 900, 3);
  ASSERT_EQ(t.pixels.size(), 900u);
  std::set<PixelPos> pos;
  for (const auto& p : t.pixels) {
    pos.insert(p.pos);
    EXPECT_TRUE(colors.contains(p.color));
    EXPECT_TRUE(p.pos.col >= 0 && p.pos.col < 100 && p.pos.row >= 0 && p.pos.row < 100);
  }
  EXPECT_EQ(pos.size(), 900u);
}

TEST(Assemble, SinglePixelAndTooSmallMask) {
  const auto colors = test_colors();
  EXPECT_EQ(assemble_trigger(full_mask(5, 5), colors, 1, 1).pixels.size(), 1u);
  try {
    assemble_trigger(full_mask(5, 5), colors, 26, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "insufficient mask area");
  }
}

TEST(Assemble, PositionsComeFromMask) {
  const auto colors = test_colors();
  const auto mask = generate_mask(60, 60, 10, 0.25, 4);
  const std::set<PixelPos> cells(mask.cells.begin(), mask.cells.end());
  const auto t = assemble_trigger(mask, colors, 200, 8);
  for (const auto& p : t.pixels) EXPECT_TRUE(cells.count(p.pos));
  EXPECT_EQ(t, assemble_trigger(mask, colors, 200, 8));
}

TEST(Apply, ChangesExactlyTriggerPixels) {
  const auto colors = test_colors();
  const Image gray(1280, 720, {128, 128, 128});
  const auto t = assemble_trigger(full_mask(100, 100), colors, 900, 12);
  const PixelPos origin{300, 200};
  const Image out = apply_trigger(gray, t, origin);
  EXPECT_EQ(count_differing_pixels(gray, out), 900u);
  for (int r = 0; r < 720; r += 7)
    for (int c = 0; c < 1280; c += 7) {
      const bool inside = c >= 300 && c < 400 && r >= 200 && r < 300;
      if (!inside) {
        ASSERT_EQ(out.at(c, r), gray.at(c, r));
      }
    }
  for (const auto& p : t.pixels) EXPECT_EQ(out.at(300 + p.pos.col, 200 + p.pos.row), p.color);
  EXPECT_EQ(gray.at(300, 200), (Rgb{128, 128, 128}));
}

TEST(Apply, OutOfBounds) {
  const auto colors = test_colors();
  const auto t = assemble_trigger(full_mask(100, 100), colors, 900, 12);
  EXPECT_THROW(apply_trigger(Image(1280, 720), t, {1200, 650}), Error);
  EXPECT_THROW(apply_trigger(Image(1280, 720), t, {-1, 0}), Error);
}

TEST(Apply, RandomOriginAlwaysFits) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto o = random_origin(64, 64, 24, 24, rng);
    ASSERT_TRUE(o.col >= 0 && o.row >= 0 && o.col + 24 <= 64 && o.row + 24 <= 64);
  }
  EXPECT_THROW(random_origin(20, 64, 24, 24, rng), Error);
}

TEST(TriggerJson, RoundTrip) {
  const auto t = assemble_trigger(full_mask(24, 24), test_colors(), 80, 6);
  EXPECT_EQ(trigger_from_json(trigger_to_json(t)), t);
  EXPECT_THROW(trigger_from_json(R"({"region":[2,2],"pixels":[[5,0,1,2,3]]})"), Error);
  EXPECT_THROW(trigger_from_json("not json"), Error);
}

}  // namespace
}  // namespace badlane
