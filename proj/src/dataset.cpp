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

#include "badlane/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "badlane/common.hpp"

namespace badlane {

namespace {

using nlohmann::json;

void append_number(std::string& out, double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    out += std::to_string(static_cast<long long>(v));
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_escaped(std::string& out, const std::string& s) {
  out += json(s).dump();
}

}  // namespace

void validate_record(const ImageRecord& record) {
  for (std::size_t i = 1; i < record.h_samples.size(); ++i)
    if (record.h_samples[i] <= record.h_samples[i - 1])
      throw Error("h_samples not strictly increasing in " + record.raw_file);
  for (std::size_t l = 0; l < record.lanes.size(); ++l)
    if (record.lanes[l].xs.size() != record.h_samples.size())
      throw Error("lane " + std::to_string(l) + " length " +
                  std::to_string(record.lanes[l].xs.size()) +
                  " does not match h_samples length " +
                  std::to_string(record.h_samples.size()) + " in " +
                  record.raw_file);
}

ImageRecord parse_tusimple_line(std::string_view line, int width, int height) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed label line: ") + e.what());
  }
  if (!j.is_object() || !j.contains("lanes") || !j.contains("h_samples") ||
      !j.contains("raw_file"))
    throw Error("label line must have keys lanes, h_samples, raw_file");

  ImageRecord rec;
  rec.width = width;
  rec.height = height;
  try {
    rec.raw_file = j.at("raw_file").get<std::string>();
    for (const auto& h : j.at("h_samples")) {
      if (!h.is_number()) throw Error("h_samples entries must be numbers");
      rec.h_samples.push_back(static_cast<int>(std::lround(h.get<double>())));
    }
    for (const auto& lane : j.at("lanes")) {
      if (!lane.is_array()) throw Error("lane must be an array");
      LaneLabel label;
      label.xs.reserve(lane.size());
      for (const auto& x : lane) {
        if (!x.is_number()) throw Error("lane entries must be numbers");
        const double v = x.get<double>();
        label.xs.push_back(v < 0.0 ? kNoPoint : v);
      }
      rec.lanes.push_back(std::move(label));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed label line: ") + e.what());
  }
  validate_record(rec);
  return rec;
}

std::string serialize_tusimple_line(const ImageRecord& record) {
  std::string out = "{\"lanes\":[";
  for (std::size_t l = 0; l < record.lanes.size(); ++l) {
    if (l) out += ',';
    out += '[';
    const auto& xs = record.lanes[l].xs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ',';
      append_number(out, xs[i]);
    }
    out += ']';
  }
  out += "],\"h_samples\":[";
  for (std::size_t i = 0; i < record.h_samples.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(record.h_samples[i]);
  }
  out += "],\"raw_file\":";
  append_escaped(out, record.raw_file);
  out += '}';
  return out;
}

std::vector<ImageRecord> read_label_file(const std::filesystem::path& path,
                                         int width, int height) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file: " + path.string());
  std::vector<ImageRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_tusimple_line(line, width, height));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_label_file(const std::filesystem::path& path,
                      const std::vector<ImageRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write label file: " + path.string());
  for (const auto& r : records) out << serialize_tusimple_line(r) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<Point> lane_points(const ImageRecord& record, std::size_t lane_index) {
  if (lane_index >= record.lanes.size())
    throw Error("lane index " + std::to_string(lane_index) + " out of range");
  const auto& xs = record.lanes[lane_index].xs;
  std::vector<Point> pts;
  for (std::size_t j = 0; j < xs.size() && j < record.h_samples.size(); ++j)
    if (is_point(xs[j])) pts.push_back({xs[j], static_cast<double>(record.h_samples[j])});
  return pts;
}

std::size_t count_points(const ImageRecord& record) {
  std::size_t n = 0;
  for (const auto& lane : record.lanes)
    for (double x : lane.xs)
      if (is_point(x)) ++n;
  return n;
}

Image load_record_image(const Dataset& dataset, const ImageRecord& record) {
  return read_image(dataset.root / record.raw_file);
}

std::vector<int> synthetic_h_samples(int height) {
  constexpr int kRows = 16;
  const int start = height / 4;
  const int end = height - 1;
  std::vector<int> rows(kRows);
  for (int i = 0; i < kRows; ++i)
    rows[i] = start + static_cast<int>(std::lround(
                          static_cast<double>(i) * (end - start) / (kRows - 1)));
  return rows;
}

namespace {

struct SyntheticSample {
  Image image;
  ImageRecord record;
  std::vector<std::optional<SyntheticLane>> curves;
};

SyntheticSample make_sample(std::size_t index, int width, int height,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticSample s;
  s.record.raw_file = "clips/synth/" + [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu.png", index);
    return std::string(buf);
  }();
  s.record.width = width;
  s.record.height = height;
  s.record.h_samples = synthetic_h_samples(height);
  const auto& rows = s.record.h_samples;

  // Choose 2-4 of the slots, ordered left to right.
  const int count = 2 + static_cast<int>(rng() % 3);
  std::vector<int> slots(kSyntheticLaneSlots);
  for (int i = 0; i < kSyntheticLaneSlots; ++i) slots[i] = i;
  std::shuffle(slots.begin(), slots.end(), rng);
  slots.resize(count);
  std::sort(slots.begin(), slots.end());

  const double y0 = height - 1.0;
  const double top = rows.front() - y0;  // negative
  s.curves.assign(kSyntheticLaneSlots, std::nullopt);
  s.record.lanes.assign(kSyntheticLaneSlots,
                        LaneLabel{std::vector<double>(rows.size(), kNoPoint)});

  for (int attempt = 0;; ++attempt) {
    // Shared road geometry: curvature bends the far end at most 12% of the
    // width, heading drifts it at most 8%.
    const double a = uniform(-0.12, 0.12) * width / (top * top);
    const double b = uniform(-0.08, 0.08) * width / -top;
    bool ok = true;
    std::vector<std::optional<SyntheticLane>> curves(kSyntheticLaneSlots);
    for (int slot : slots) {
      const double c =
          width * (0.125 + 0.25 * slot) + uniform(-0.04, 0.04) * width;
      // Perspective: lanes converge halfway toward the center at the top row.
      const double converge = 0.5 * (c - width / 2.0) / -top;
      SyntheticLane lane{a, b - converge, c, y0};
      int inside = 0;
      for (int y : rows) {
        const double x = lane.eval(y);
        if (x >= 0.0 && x < width) ++inside;
      }
      if (inside < static_cast<int>(std::ceil(0.6 * rows.size()))) ok = false;
      curves[slot] = lane;
    }
    if (ok || attempt >= 64) {
      s.curves = std::move(curves);
      break;
    }
  }

  for (int slot = 0; slot < kSyntheticLaneSlots; ++slot) {
    if (!s.curves[slot]) continue;
    auto& xs = s.record.lanes[slot].xs;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double x = std::round(s.curves[slot]->eval(rows[j]));
      xs[j] = (x >= 0.0 && x < width) ? x : kNoPoint;
    }
  }

  // Render: noisy gray asphalt, white marks from the first sampled row down.
  const int base = static_cast<int>(uniform(85.0, 115.0));
  Image img(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int v = std::clamp(base + static_cast<int>(rng() % 17) - 8, 0, 255);
      img.set(c, r, {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                     static_cast<std::uint8_t>(v)});
    }
  const double half = std::max(1.0, width / 128.0);
  for (const auto& curve : s.curves) {
    if (!curve) continue;
    for (int r = rows.front(); r < height; ++r) {
      const double xc = curve->eval(r);
      const int lo = static_cast<int>(std::ceil(xc - half));
      const int hi = static_cast<int>(std::floor(xc + half));
      for (int c = std::max(lo, 0); c <= std::min(hi, width - 1); ++c) {
        const auto w = static_cast<std::uint8_t>(225 + rng() % 31);
        img.set(c, r, {w, w, w});
      }
    }
  }
  s.image = std::move(img);
  return s;
}

}  // namespace

SyntheticDataset generate_synthetic_dataset(std::size_t n, int width, int height,
                                            std::uint64_t seed) {
  if (n < 1) throw Error("synthetic dataset needs n >= 1");
  if (width < 32 || height < 32) throw Error("synthetic images must be at least 32x32");
  SyntheticDataset out;
  out.dataset.root = ".";
  out.dataset.records.reserve(n);
  out.images.reserve(n);
  out.curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = make_sample(i, width, height, seed);
    out.dataset.records.push_back(std::move(s.record));
    out.images.push_back(std::move(s.image));
    out.curves.push_back(std::move(s.curves));
  }
  return out;
}

void save_dataset(const SyntheticDataset& data, const std::filesystem::path& root,
                  const std::string& label_file) {
  for (std::size_t i = 0; i < data.dataset.records.size(); ++i)
    write_image(root / data.dataset.records[i].raw_file, data.images[i]);
  write_label_file(root / label_file, data.dataset.records);
}

}  // namespace badlane
