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

#include "badlane/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <string>

#include "badlane/common.hpp"

namespace badlane {

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error("negative image dimensions");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Image read_image(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("unreadable image: " + path.string());
  Image out(bgr.cols, bgr.rows);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c)
      out.set(c, r, {row[c][2], row[c][1], row[c][0]});
  }
  return out;
}

void write_image(const std::filesystem::path& path, const Image& image) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int r = 0; r < image.height(); ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < image.width(); ++c) {
      const Rgb px = image.at(c, r);
      row[c] = cv::Vec3b(px.b, px.g, px.r);
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw Error("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error("cannot write image: " + path.string());
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.width() == width && image.height() == height) return image;
  if (image.empty() || width <= 0 || height <= 0)
    throw Error("resize_bilinear: invalid dimensions");
  Image out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int r = 0; r < height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int c = 0; c < width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      const Rgb a = image.at(x0, y0), b = image.at(x1, y0);
      const Rgb d = image.at(x0, y1), e = image.at(x1, y1);
      auto lerp = [&](double p, double q, double s, double t) {
        const double top = p + (q - p) * wx;
        const double bottom = s + (t - s) * wx;
        return static_cast<std::uint8_t>(std::lround(top + (bottom - top) * wy));
      };
      out.set(c, r, {lerp(a.r, b.r, d.r, e.r), lerp(a.g, b.g, d.g, e.g),
                     lerp(a.b, b.b, d.b, e.b)});
    }
  }
  return out;
}

double mean_intensity(const Image& image) {
  if (image.empty()) return 0.0;
  double sum = 0.0;
  for (std::uint8_t v : image.bytes()) sum += v;
  return sum / static_cast<double>(image.bytes().size());
}

std::size_t count_differing_pixels(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error("count_differing_pixels: size mismatch");
  std::size_t n = 0;
  for (int r = 0; r < a.height(); ++r)
    for (int c = 0; c < a.width(); ++c)
      if (a.at(c, r) != b.at(c, r)) ++n;
  return n;
}

}  // namespace badlane
