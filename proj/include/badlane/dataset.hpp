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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "badlane/image.hpp"

namespace badlane {

// TuSimple "no point at this row" marker.
inline constexpr double kNoPoint = -2.0;

inline bool is_point(double x) { return x >= 0.0; }

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Horizontal coordinates aligned with the owning record's h_samples.
struct LaneLabel {
  std::vector<double> xs;
  bool operator==(const LaneLabel&) const = default;
};

struct ImageRecord {
  std::string raw_file;
  std::vector<int> h_samples;
  std::vector<LaneLabel> lanes;
  // Not part of the TuSimple line; filled from the image or a default.
  int width = 1280;
  int height = 720;

  bool operator==(const ImageRecord&) const = default;
};

struct Dataset {
  std::vector<ImageRecord> records;
  std::filesystem::path root;
};

// Checks lane lengths and h_samples ordering; throws Error on violation.
void validate_record(const ImageRecord& record);

ImageRecord parse_tusimple_line(std::string_view line, int width = 1280,
                                int height = 720);
// Key order is always lanes, h_samples, raw_file; integral x values are
// written as integers.
std::string serialize_tusimple_line(const ImageRecord& record);

std::vector<ImageRecord> read_label_file(const std::filesystem::path& path,
                                         int width = 1280, int height = 720);
void write_label_file(const std::filesystem::path& path,
                      const std::vector<ImageRecord>& records);

std::vector<Point> lane_points(const ImageRecord& record, std::size_t lane_index);

std::size_t count_points(const ImageRecord& record);

Image load_record_image(const Dataset& dataset, const ImageRecord& record);

struct SyntheticLane {
  // x = a (y - y0)^2 + b (y - y0) + c
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double y0 = 0.0;
  double eval(double y) const {
    const double d = y - y0;
    return a * d * d + b * d + c;
  }
};

struct SyntheticDataset {
  Dataset dataset;
  std::vector<Image> images;
  // Curves per record, in lane-slot order; absent slots have no curve.
  std::vector<std::vector<std::optional<SyntheticLane>>> curves;
};

inline constexpr int kSyntheticLaneSlots = 4;

// h_samples grid used for synthetic records: 16 rows spread over the lower
// three quarters of the frame.
std::vector<int> synthetic_h_samples(int height);

// Road scenes with 2-4 white quadratic lane marks. Every record has
// kSyntheticLaneSlots lane entries; slots without a mark are all-sentinel so
// a lane keeps its slot index across label transforms.
SyntheticDataset generate_synthetic_dataset(std::size_t n, int width, int height,
                                            std::uint64_t seed);

// Writes images under root and the label file at root/label_file.
void save_dataset(const SyntheticDataset& data, const std::filesystem::path& root,
                  const std::string& label_file = "label_data.json");

}  // namespace badlane
