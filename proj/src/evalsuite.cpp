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


#include "badlane/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "badlane/common.hpp"
#include "badlane/environment.hpp"

namespace badlane {

namespace {

constexpr std::uint64_t kVariantStream = 0x76617269ULL;

// Solves a dense n x n system in place (partial pivoting).
template <std::size_t N>
std::array<double, N> solve(std::array<std::array<double, N + 1>, N> a) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) throw Error("degenerate viewpoint warp");
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= N; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = 0; i < N; ++i) x[i] = a[i][N] / a[i][i];
  return x;
}

std::array<double, 9> invert3(const std::array<double, 9>& m) {
  const double a = m[0], b = m[1], c = m[2], d = m[3], e = m[4], f = m[5], g = m[6], h = m[7],
               i = m[8];
  const double A = e * i - f * h, B = -(d * i - f * g), C = d * h - e * g;
  const double det = a * A + b * B + c * C;
  if (std::abs(det) < 1e-12) throw Error("degenerate viewpoint warp");
  return {A / det,
          -(b * i - c * h) / det,
          (b * f - c * e) / det,
          B / det,
          (a * i - c * g) / det,
          -(a * f - c * d) / det,
          C / det,
          -(a * h - b * g) / det,
          (a * e - b * d) / det};
}

Vertex apply_h(const std::array<double, 9>& h, double x, double y) {
  const double w = h[6] * x + h[7] * y + h[8];
  return {(h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w};
}

}  // namespace

std::string_view variant_name(VariantTag tag) {
  switch (tag) {
    case VariantTag::origin: return "origin";
    case VariantTag::position: return "position";
    case VariantTag::shape: return "shape";
    case VariantTag::viewpoint: return "viewpoint";
    case VariantTag::size: return "size";
    case VariantTag::sunlight: return "sunlight";
    case VariantTag::shadow: return "shadow";
    case VariantTag::rain: return "rain";
    case VariantTag::snow: return "snow";
  }
  return "origin";
}

VariantTag parse_variant(std::string_view name) {
  for (VariantTag t : kAllVariantTags)
    if (variant_name(t) == name) return t;
  throw Error("unknown variant: " + std::string(name));
}

std::string VariantSpec::label() const {
  if (tag != VariantTag::size) return std::string(variant_name(tag));
  char buf[48];
  std::snprintf(buf, sizeof buf, "size@%g", scale);
  return buf;
}

std::vector<VariantSpec> default_variants() {
  std::vector<VariantSpec> out;
  for (VariantTag t : kAllVariantTags) {
    if (t == VariantTag::size) {
      for (double s : {0.5, 2.0}) out.push_back({.tag = t, .scale = s});
    } else {
      out.push_back({.tag = t});
    }
  }
  return out;
}

PixelPos canonical_origin(int image_width, int image_height, int region_width,
                          int region_height) {
  return {std::max(0, (image_width - region_width) / 2),
          std::max(0, image_height - region_height - image_height / 8)};
}

std::array<double, 9> homography_from_corners(double width, double height,
                                              const std::array<Vertex, 4>& corners) {
  const Vertex src[4] = {{0, 0}, {width, 0}, {width, height}, {0, height}};
  std::array<std::array<double, 9>, 8> a{};
  for (int k = 0; k < 4; ++k) {
    const double x = src[k].x, y = src[k].y, u = corners[k].x, v = corners[k].y;
    a[2 * k] = {x, y, 1, 0, 0, 0, -u * x, -u * y, u};
    a[2 * k + 1] = {0, 0, 0, x, y, 1, -v * x, -v * y, v};
  }
  const auto h = solve<8>(a);
  return {h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0};
}

TriggerPattern warp_trigger(const TriggerPattern& trigger, double jitter, std::uint64_t seed,
                            PixelPos* shift) {
  if (!(jitter >= 0.0 && jitter < 0.5)) throw Error("viewpoint jitter must be in [0, 0.5)");
  const double w = trigger.width, h = trigger.height;
  Rng rng(seed);
  std::uniform_real_distribution<double> jx(-jitter * w, jitter * w), jy(-jitter * h, jitter * h);
  std::array<Vertex, 4> corners{Vertex{0, 0}, Vertex{w, 0}, Vertex{w, h}, Vertex{0, h}};
  for (auto& c : corners) {
    c.x += jx(rng);
    c.y += jy(rng);
  }
  const auto inv = invert3(homography_from_corners(w, h, corners));

  double min_x = corners[0].x, max_x = corners[0].x, min_y = corners[0].y, max_y = corners[0].y;
  for (const auto& c : corners) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  const int x0 = static_cast<int>(std::floor(min_x)), y0 = static_cast<int>(std::floor(min_y));
  const int x1 = static_cast<int>(std::ceil(max_x)), y1 = static_cast<int>(std::ceil(max_y));

  std::vector<int> lookup(static_cast<std::size_t>(trigger.width) * trigger.height, -1);
  for (std::size_t i = 0; i < trigger.pixels.size(); ++i) {
    const PixelPos p = trigger.pixels[i].pos;
    lookup[static_cast<std::size_t>(p.row) * trigger.width + p.col] = static_cast<int>(i);
  }

  TriggerPattern out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const Vertex s = apply_h(inv, x + 0.5, y + 0.5);
      const int sc = static_cast<int>(std::floor(s.x)), sr = static_cast<int>(std::floor(s.y));
      if (sc < 0 || sr < 0 || sc >= trigger.width || sr >= trigger.height) continue;
      const int idx = lookup[static_cast<std::size_t>(sr) * trigger.width + sc];
      if (idx >= 0) out.pixels.push_back({{x - x0, y - y0}, trigger.pixels[idx].color});
    }
  if (shift) *shift = {x0, y0};
  return out;
}

TriggerPattern size_variant_trigger(const TriggerSource& source, double scale,
                                    std::uint64_t seed) {
  if (!(scale > 0.0)) throw Error("size scale must be positive");
  const double side = std::sqrt(scale);
  const int w = std::max(1, static_cast<int>(std::lround(source.trigger.width * side)));
  const int h = std::max(1, static_cast<int>(std::lround(source.trigger.height * side)));
  const auto k = static_cast<std::size_t>(
      std::llround(scale * static_cast<double>(source.trigger.pixels.size())));
  if (k == 0) throw Error("size variant leaves no trigger pixels");
  return assemble_trigger(full_mask(w, h), source.colors, k, seed);
}

Image make_variant(const Image& image, const TriggerSource& source, const VariantSpec& spec,
                   std::uint64_t seed) {
  const TriggerPattern& t = source.trigger;
  const PixelPos home = canonical_origin(image.width(), image.height(), t.width, t.height);
  switch (spec.tag) {
    case VariantTag::origin:
      return apply_trigger(image, t, home);
    case VariantTag::position: {
      Rng rng(seed);
      return apply_trigger(image, t, random_origin(image.width(), image.height(), t.width,
                                                   t.height, rng));
    }
    case VariantTag::shape: {
      const MaskSpec mask =
          generate_mask(t.width, t.height, spec.mask_vertices, spec.mask_drop, seed);
      return apply_trigger(
          image, assemble_trigger(mask, source.colors, t.pixels.size(), derive_seed(seed, 1)),
          home);
    }
    case VariantTag::viewpoint: {
      PixelPos shift;
      const TriggerPattern warped = warp_trigger(t, spec.jitter, seed, &shift);
      return apply_trigger(image, warped, {home.col + shift.col, home.row + shift.row});
    }
    case VariantTag::size: {
      const TriggerPattern sized = size_variant_trigger(source, spec.scale, seed);
      return apply_trigger(
          image, sized, canonical_origin(image.width(), image.height(), sized.width, sized.height));
    }
    case VariantTag::sunlight:
    case VariantTag::shadow:
    case VariantTag::rain:
    case VariantTag::snow: {
      const EnvCondition cond{parse_env_kind(variant_name(spec.tag)), spec.intensity, seed};
      return apply_condition(apply_trigger(image, t, home), cond);
    }
  }
  throw Error("unhandled variant");
}

SuiteResult run_suite(const SurrogateModel& victim, std::span<const ImageRecord> records,
                      std::span<const Image> images, const TriggerSource& source,
                      std::span<const VariantSpec> specs, const SuiteConfig& cfg) {
  if (specs.empty()) throw Error("no suite variants requested");
  if (records.size() != images.size()) throw Error("image and record counts differ");
  cfg.strategy.validate();
  const std::size_t n = records.size();

  SuiteResult out;
  out.clean_predictions.resize(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    out.clean_predictions[i] = predict(victim, images[i], records[i]);
  });
  out.clean = compute_acc(records, out.clean_predictions, cfg.threshold, cfg.jobs);
  out.clean.condition_tag = "clean";

  std::vector<ImageRecord> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = apply_strategy(records[i], cfg.strategy);

  for (std::size_t v = 0; v < specs.size(); ++v) {
    VariantResult vr;
    vr.spec = specs[v];
    vr.predictions.resize(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      const Image malicious =
          make_variant(images[i], source, specs[v], derive_seed(cfg.seed, kVariantStream + v, i));
      vr.predictions[i] = predict(victim, malicious, records[i]);
    });
    const MetricsReport asr =
        compute_asr(targets, vr.predictions, cfg.threshold, cfg.strategy.kind, cfg.jobs);
    vr.report = combine_reports(out.clean, asr, specs[v].label());
    out.variants.push_back(std::move(vr));
  }

  std::map<std::string, std::pair<double, int>> by_tag;
  for (const auto& vr : out.variants) {
    auto& [sum, count] = by_tag[std::string(variant_name(vr.spec.tag))];
    sum += vr.report.asr;
    ++count;
  }
  for (const auto& [tag, agg] : by_tag)
    out.rows.push_back({tag, out.clean.acc, agg.first / agg.second});
  return out;
}

}  // namespace badlane
