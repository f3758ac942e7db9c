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

#include "badlane/environment.hpp"

#include <cmath>

#include "badlane/common.hpp"
#include "badlane/trigger.hpp"

namespace badlane {

namespace {

std::uint8_t clamp8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void sunlight(Image& img, double intensity, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cx = u(rng) * img.width(), cy = u(rng) * img.height();
  const double radius = 0.75 * std::max(img.width(), img.height());
  const double peak = 160.0 * intensity;
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      const double fall = std::max(0.0, 1.0 - std::hypot(c + 0.5 - cx, r + 0.5 - cy) / radius);
      const double add = peak * fall;
      const Rgb p = img.at(c, r);
      img.set(c, r, {clamp8(p.r + add), clamp8(p.g + add), clamp8(p.b + add)});
    }
}

void shadow(Image& img, double intensity, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 4 + static_cast<int>(rng() % 3);
  const double cx = u(rng) * img.width(), cy = u(rng) * img.height();
  const double base = std::min(img.width(), img.height());
  std::vector<Vertex> poly(n);
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * 3.14159265358979323846 * (i + 0.3 * u(rng)) / n;
    const double rad = (0.3 + 0.3 * u(rng)) * base;
    poly[i] = {cx + rad * std::cos(angle), cy + rad * std::sin(angle)};
  }
  const double factor = 1.0 - 0.6 * intensity;
  for (const auto& cell : rasterize_polygon(poly, img.width(), img.height())) {
    const Rgb p = img.at(cell.col, cell.row);
    img.set(cell.col, cell.row, {clamp8(p.r * factor), clamp8(p.g * factor), clamp8(p.b * factor)});
  }
}

void rain(Image& img, double intensity, Rng& rng) {
  const auto streaks = static_cast<long>(
      std::lround(intensity * img.width() * static_cast<double>(img.height()) / 60.0));
  const int length = std::max(3, img.height() / 10);
  const double alpha = 0.5;
  const Rgb drop{200, 200, 215};
  for (long s = 0; s < streaks; ++s) {
    const int c0 = static_cast<int>(rng() % static_cast<unsigned>(img.width()));
    const int r0 = static_cast<int>(rng() % static_cast<unsigned>(img.height()));
    for (int t = 0; t < length; ++t) {
      const int c = c0 + t / 2, r = r0 + t;
      if (!img.contains(c, r)) break;
      const Rgb p = img.at(c, r);
      img.set(c, r, {clamp8(p.r * (1 - alpha) + drop.r * alpha),
                     clamp8(p.g * (1 - alpha) + drop.g * alpha),
                     clamp8(p.b * (1 - alpha) + drop.b * alpha)});
    }
  }
}

void snow(Image& img, double intensity, Rng& rng) {
  const auto flakes = static_cast<long>(
      std::lround(intensity * 0.04 * img.width() * static_cast<double>(img.height())));
  for (long s = 0; s < flakes; ++s) {
    const int c = static_cast<int>(rng() % static_cast<unsigned>(img.width()));
    const int r = static_cast<int>(rng() % static_cast<unsigned>(img.height()));
    const bool big = rng() % 4 == 0;
    for (int dr = 0; dr <= (big ? 1 : 0); ++dr)
      for (int dc = 0; dc <= (big ? 1 : 0); ++dc)
        if (img.contains(c + dc, r + dr)) img.set(c + dc, r + dr, {245, 245, 250});
  }
}

}  // namespace

EnvKind parse_env_kind(std::string_view name) {
  if (name == "none") return EnvKind::none;
  if (name == "sunlight") return EnvKind::sunlight;
  if (name == "shadow") return EnvKind::shadow;
  if (name == "rain") return EnvKind::rain;
  if (name == "snow") return EnvKind::snow;
  throw Error("unknown environment condition '" + std::string(name) + "'");
}

std::string_view env_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::none: return "none";
    case EnvKind::sunlight: return "sunlight";
    case EnvKind::shadow: return "shadow";
    case EnvKind::rain: return "rain";
    case EnvKind::snow: return "snow";
  }
  return "?";
}

Image apply_condition(const Image& image, const EnvCondition& cond) {
  if (!(cond.intensity >= 0.0 && cond.intensity <= 1.0))
    throw Error("environment intensity must be in [0, 1]");
  Image out = image;
  if (cond.kind == EnvKind::none || cond.intensity == 0.0 || image.empty()) return out;
  Rng rng(derive_seed(cond.seed, static_cast<std::uint64_t>(cond.kind)));
  switch (cond.kind) {
    case EnvKind::sunlight: sunlight(out, cond.intensity, rng); break;
    case EnvKind::shadow: shadow(out, cond.intensity, rng); break;
    case EnvKind::rain: rain(out, cond.intensity, rng); break;
    case EnvKind::snow: snow(out, cond.intensity, rng); break;
    case EnvKind::none: break;
  }
  return out;
}

Image apply_condition_in_region(const Image& image, const EnvCondition& cond,
                                PixelPos origin, int width, int height) {
  if (origin.col < 0 || origin.row < 0 || origin.col + width > image.width() ||
      origin.row + height > image.height())
    throw Error("condition region out of bounds");
  Image patch(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) patch.set(c, r, image.at(origin.col + c, origin.row + r));
  patch = apply_condition(patch, cond);
  Image out = image;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) out.set(origin.col + c, origin.row + r, patch.at(c, r));
  return out;
}

namespace {

std::vector<EnvCondition> ordered(std::span<const EnvCondition> conds) {
  std::vector<EnvCondition> v(conds.begin(), conds.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return v;
}

}  // namespace

Image apply_conditions(const Image& image, std::span<const EnvCondition> conds) {
  Image out = image;
  for (const auto& c : ordered(conds)) out = apply_condition(out, c);
  return out;
}

Image apply_conditions_in_region(const Image& image, std::span<const EnvCondition> conds,
                                 PixelPos origin, int width, int height) {
  Image out = image;
  for (const auto& c : ordered(conds)) out = apply_condition_in_region(out, c, origin, width, height);
  return out;
}

std::vector<EnvCondition> sample_conditions(double per_type_prob, std::uint64_t seed,
                                            double intensity) {
  if (!(per_type_prob >= 0.0 && per_type_prob <= 1.0))
    throw Error("environment probability must be in [0, 1]");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EnvCondition> out;
  for (EnvKind kind : kWeatherKinds) {
    const double draw = u(rng);
    if (draw < per_type_prob)
      out.push_back({kind, intensity, derive_seed(seed, static_cast<std::uint64_t>(kind))});
  }
  return out;
}

std::string conditions_tag(std::span<const EnvCondition> conds) {
  if (conds.empty()) return "none";
  std::string tag;
  for (const auto& c : ordered(conds)) {
    if (!tag.empty()) tag += '+';
    tag += env_name(c.kind);
  }
  return tag;
}

}  // namespace badlane
