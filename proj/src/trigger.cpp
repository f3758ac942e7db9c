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

#include "badlane/trigger.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>

namespace badlane {

Hsv to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.val = mx;
  out.sat = mx > 0.0 ? d / mx : 0.0;
  if (d > 0.0) {
    double h;
    if (mx == r)
      h = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      h = (b - r) / d + 2.0;
    else
      h = (r - g) / d + 4.0;
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.hue = h;
  }
  return out;
}

Rgb from_hsv(const Hsv& hsv) {
  const double c = hsv.val * hsv.sat;
  const double hp = std::fmod(hsv.hue, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = hsv.val - c;
  auto to8 = [&](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround((v + m) * 255.0), 0L, 255L));
  };
  return {to8(r), to8(g), to8(b)};
}

bool BrownPredicate::operator()(Rgb c) const {
  const Hsv hsv = to_hsv(c);
  if (hsv.sat <= 0.0) return false;
  return hsv.hue >= hue_min && hsv.hue <= hue_max && hsv.sat >= sat_min &&
         hsv.sat <= sat_max && hsv.val >= val_min && hsv.val <= val_max;
}

void BrownPredicate::validate() const {
  auto bad = [](double lo, double hi, double max) {
    return !(lo >= 0.0 && hi <= max && lo <= hi);
  };
  if (bad(hue_min, hue_max, 360.0)) throw Error("brown predicate: invalid hue range");
  if (bad(sat_min, sat_max, 1.0)) throw Error("brown predicate: invalid saturation range");
  if (bad(val_min, val_max, 1.0)) throw Error("brown predicate: invalid value range");
}

bool ColorSet::contains(Rgb c) const {
  return std::binary_search(colors.begin(), colors.end(), c);
}

ColorSet extract_color_set(std::span<const Image> patterns,
                           const BrownPredicate& predicate) {
  predicate.validate();
  if (patterns.empty()) throw Error("extract_color_set: no pattern images");
  std::set<Rgb> found;
  for (const auto& img : patterns)
    for (int r = 0; r < img.height(); ++r)
      for (int c = 0; c < img.width(); ++c) {
        const Rgb px = img.at(c, r);
        if (predicate(px)) found.insert(px);
      }
  if (found.empty()) throw Error("no brown pixels found");
  return ColorSet{{found.begin(), found.end()}};
}

void write_color_set(const std::filesystem::path& path, const ColorSet& colors) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write color set: " + path.string());
  for (const Rgb& c : colors.colors) {
    const char triple[3] = {static_cast<char>(c.r), static_cast<char>(c.g),
                            static_cast<char>(c.b)};
    out.write(triple, 3);
  }
}

ColorSet read_color_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open color set: " + path.string());
  const std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (raw.empty() || raw.size() % 3 != 0)
    throw Error("color set file is not a list of RGB triples: " + path.string());
  ColorSet set;
  for (std::size_t i = 0; i < raw.size(); i += 3)
    set.colors.push_back({static_cast<std::uint8_t>(raw[i]),
                          static_cast<std::uint8_t>(raw[i + 1]),
                          static_cast<std::uint8_t>(raw[i + 2])});
  if (!std::is_sorted(set.colors.begin(), set.colors.end()) ||
      std::adjacent_find(set.colors.begin(), set.colors.end()) != set.colors.end())
    throw Error("color set file is not sorted and unique: " + path.string());
  return set;
}

std::vector<Vertex> mask_polygon(int width, int height, int vertices,
                                 std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(0.4, 1.0);
  const double cx = width / 2.0, cy = height / 2.0;
  const double r = std::min(width, height) / 2.0;
  std::vector<Vertex> poly(vertices);
  for (int i = 0; i < vertices; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / vertices;
    const double rad = jitter(rng) * r;
    poly[i] = {cx + rad * std::cos(angle), cy + rad * std::sin(angle)};
  }
  return poly;
}

std::vector<PixelPos> rasterize_polygon(std::span<const Vertex> polygon, int width,
                                        int height) {
  std::vector<PixelPos> cells;
  const std::size_t n = polygon.size();
  std::vector<double> xs;
  for (int row = 0; row < height; ++row) {
    const double y = row + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = polygon[i];
      const Vertex& b = polygon[(i + 1) % n];
      // Half-open in y so shared vertices are counted once.
      if ((a.y <= y) != (b.y <= y))
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Cell centers c + 0.5 in [xs[i], xs[i+1]).
      const int lo = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int hi = std::min(width - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
      for (int col = lo; col <= hi; ++col) cells.push_back({col, row});
    }
  }
  return cells;
}

MaskSpec generate_mask(int width, int height, int vertices, double drop_fraction,
                       std::uint64_t seed) {
  if (width < 4 || height < 4) throw Error("generate_mask: region must be at least 4x4");
  if (vertices < 3 || vertices > 32) throw Error("generate_mask: vertices must be in [3, 32]");
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0))
    throw Error("generate_mask: drop_fraction must be in [0, 1)");

  for (int attempt = 0; attempt < 16; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, attempt);
    const auto poly = mask_polygon(width, height, vertices, s);
    auto filled = rasterize_polygon(poly, width, height);
    if (filled.empty()) continue;
    const auto keep = static_cast<std::size_t>(
        std::lround((1.0 - drop_fraction) * static_cast<double>(filled.size())));
    if (keep == 0) continue;
    MaskSpec mask{width, height, {}};
    mask.cells.reserve(keep);
    Rng rng(derive_seed(s, 0x6d61736bULL));
    std::sample(filled.begin(), filled.end(), std::back_inserter(mask.cells), keep, rng);
    return mask;
  }
  throw Error("generate_mask: degenerate polygon after 16 attempts");
}

MaskSpec full_mask(int width, int height) {
  MaskSpec mask{width, height, {}};
  mask.cells.reserve(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) mask.cells.push_back({c, r});
  return mask;
}

TriggerPattern assemble_trigger(const MaskSpec& mask, const ColorSet& colors,
                                std::size_t k, std::uint64_t seed) {
  if (colors.colors.empty()) throw Error("assemble_trigger: empty color set");
  if (mask.cells.size() < k) throw Error("insufficient mask area");
  Rng rng(seed);
  std::vector<PixelPos> chosen;
  chosen.reserve(k);
  std::sample(mask.cells.begin(), mask.cells.end(), std::back_inserter(chosen), k, rng);
  std::uniform_int_distribution<std::size_t> pick(0, colors.colors.size() - 1);
  TriggerPattern t{mask.width, mask.height, {}};
  t.pixels.reserve(k);
  for (const auto& pos : chosen) t.pixels.push_back({pos, colors.colors[pick(rng)]});
  return t;
}

Image apply_trigger(const Image& image, const TriggerPattern& trigger, PixelPos origin) {
  if (origin.col < 0 || origin.row < 0 || origin.col + trigger.width > image.width() ||
      origin.row + trigger.height > image.height())
    throw Error("trigger region out of bounds");
  Image out = image;
  for (const auto& px : trigger.pixels)
    out.set(origin.col + px.pos.col, origin.row + px.pos.row, px.color);
  return out;
}

PixelPos random_origin(int image_width, int image_height, int region_width,
                       int region_height, Rng& rng) {
  if (region_width > image_width || region_height > image_height)
    throw Error("trigger region does not fit image");
  std::uniform_int_distribution<int> col(0, image_width - region_width);
  std::uniform_int_distribution<int> row(0, image_height - region_height);
  const int c = col(rng);
  return {c, row(rng)};
}

std::string trigger_to_json(const TriggerPattern& trigger) {
  nlohmann::ordered_json j;
  j["region"] = {trigger.width, trigger.height};
  auto& pixels = j["pixels"] = nlohmann::ordered_json::array();
  for (const auto& p : trigger.pixels)
    pixels.push_back({p.pos.col, p.pos.row, p.color.r, p.color.g, p.color.b});
  return j.dump();
}

TriggerPattern trigger_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TriggerPattern t;
    t.width = j.at("region").at(0).get<int>();
    t.height = j.at("region").at(1).get<int>();
    for (const auto& p : j.at("pixels")) {
      TriggerPixel px;
      px.pos = {p.at(0).get<int>(), p.at(1).get<int>()};
      px.color = {p.at(2).get<std::uint8_t>(), p.at(3).get<std::uint8_t>(),
                  p.at(4).get<std::uint8_t>()};
      if (px.pos.col < 0 || px.pos.row < 0 || px.pos.col >= t.width || px.pos.row >= t.height)
        throw Error("trigger pixel outside its region");
      t.pixels.push_back(px);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed trigger file: ") + e.what());
  }
}

Image make_mud_pattern(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      // Clutter: gray gravel or greenish grass, neither passes the predicate.
      if (unit(rng) < 0.5) {
        const auto v = static_cast<std::uint8_t>(90 + rng() % 60);
        img.set(c, r, {v, v, v});
      } else {
        img.set(c, r, {static_cast<std::uint8_t>(40 + rng() % 30),
                       static_cast<std::uint8_t>(110 + rng() % 40),
                       static_cast<std::uint8_t>(40 + rng() % 30)});
      }
    }
  const int blobs = 3 + static_cast<int>(rng() % 4);
  for (int i = 0; i < blobs; ++i) {
    const double cx = unit(rng) * width, cy = unit(rng) * height;
    const double rad = (0.15 + 0.25 * unit(rng)) * std::min(width, height);
    const double hue = 15.0 + 25.0 * unit(rng);
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const double d = std::hypot(c - cx, r - cy) / rad;
        if (d > 1.0 || unit(rng) < d * 0.5) continue;
        Hsv hsv{hue + 4.0 * (unit(rng) - 0.5), 0.35 + 0.5 * unit(rng),
                0.2 + 0.5 * unit(rng)};
        img.set(c, r, from_hsv(hsv));
      }
  }
  return img;
}

}  // namespace badlane
