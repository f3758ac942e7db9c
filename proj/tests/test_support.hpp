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

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "badlane/dataset.hpp"
#include "badlane/surrogate.hpp"

namespace badlane::testing {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("badlane_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Direct point count for one gt/pred lane pair.
inline std::size_t count_close(const LaneLabel& p, const LaneLabel& g, double threshold) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < g.xs.size(); ++j) {
    if (g.xs[j] < 0 || p.xs[j] < 0) continue;
    if (std::fabs(p.xs[j] - g.xs[j]) < threshold) ++n;
  }
  return n;
}

// Exhaustive lane assignment: pads both sides with empty lanes and scores
// every permutation.
inline std::size_t brute_force_correct(const ImageRecord& pred, const ImageRecord& gt,
                                       double threshold) {
  const std::size_t n = std::max(pred.lanes.size(), gt.lanes.size());
  const LaneLabel empty{std::vector<double>(gt.h_samples.size(), -2.0)};
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t total = 0;
    for (std::size_t g = 0; g < n; ++g) {
      const LaneLabel& gl = g < gt.lanes.size() ? gt.lanes[g] : empty;
      const LaneLabel& pl = perm[g] < pred.lanes.size() ? pred.lanes[perm[g]] : empty;
      total += count_close(pl, gl, threshold);
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::size_t brute_force_total(const ImageRecord& gt) {
  std::size_t n = 0;
  for (const auto& l : gt.lanes)
    for (double x : l.xs)
      if (x >= 0) ++n;
  return n;
}

// Random record with up to max_lanes lanes over the given grid.
inline ImageRecord random_record(std::mt19937_64& rng, const std::vector<int>& rows,
                                 std::size_t max_lanes, int width, const std::string& name) {
  ImageRecord r;
  r.raw_file = name;
  r.h_samples = rows;
  r.width = width;
  r.height = rows.back() + 1;
  const std::size_t lanes = rng() % (max_lanes + 1);
  for (std::size_t l = 0; l < lanes; ++l) {
    LaneLabel lane;
    const double base = static_cast<double>(rng() % static_cast<unsigned>(width));
    for (std::size_t j = 0; j < rows.size(); ++j)
      lane.xs.push_back(rng() % 5 == 0 ? -2.0
                                       : std::clamp(base + static_cast<double>(rng() % 41) - 20.0,
                                                    0.0, width - 1.0));
    r.lanes.push_back(std::move(lane));
  }
  return r;
}

// Prediction derived from gt by shuffling lanes, jittering x and dropping points.
inline ImageRecord perturb_record(std::mt19937_64& rng, const ImageRecord& gt,
                                  std::size_t max_lanes) {
  ImageRecord p = gt;
  std::shuffle(p.lanes.begin(), p.lanes.end(), rng);
  for (auto& lane : p.lanes)
    for (double& x : lane.xs) {
      if (rng() % 6 == 0) x = -2.0;
      else if (x >= 0) x = std::max(0.0, x + static_cast<double>(rng() % 61) - 30.0);
    }
  while (p.lanes.size() < max_lanes && rng() % 3 == 0) {
    LaneLabel extra;
    for (std::size_t j = 0; j < gt.h_samples.size(); ++j)
      extra.xs.push_back(static_cast<double>(rng() % static_cast<unsigned>(gt.width)));
    p.lanes.push_back(std::move(extra));
  }
  return p;
}

// Central-difference check of backward() on the given parameter coordinates.
// Returns the worst relative error |a - n| / max(|a|, |n|, floor).
inline double worst_fd_error(const SurrogateModel& model, std::span<const Sample> batch,
                             std::span<const std::size_t> coords, double step = 1e-4,
                             double floor = 1e-6) {
  std::vector<double> grad(model.params.size());
  backward(model, batch, grad);
  SurrogateModel probe = model;
  double worst = 0.0;
  for (std::size_t c : coords) {
    const double keep = probe.params[c];
    probe.params[c] = keep + step;
    const double up = mean_loss(probe, batch);
    probe.params[c] = keep - step;
    const double down = mean_loss(probe, batch);
    probe.params[c] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::fabs(grad[c]), std::fabs(numeric), floor});
    worst = std::max(worst, std::fabs(grad[c] - numeric) / denom);
  }
  return worst;
}

// Activation pattern of the backbone: ReLU signs plus the global-max cell of
// every channel. The loss is smooth while this pattern stays fixed.
inline std::vector<std::size_t> activation_pattern(const SurrogateModel& model,
                                                   std::span<const Sample> batch) {
  std::vector<std::size_t> pattern;
  const std::size_t plane = static_cast<std::size_t>(model.shape.conv_side()) * model.shape.conv_side();
  for (const auto& sample : batch) {
    ForwardCache cache;
    features(model, sample.input, &cache);
    for (double v : cache.conv) pattern.push_back(v > 0.0);
    for (int o = 0; o < model.shape.channels; ++o) {
      const auto first = cache.conv.begin() + static_cast<std::ptrdiff_t>(o * plane);
      pattern.push_back(static_cast<std::size_t>(
          std::max_element(first, first + static_cast<std::ptrdiff_t>(plane)) - first));
    }
  }
  return pattern;
}

// True when moving coordinate c by +-step keeps the activation pattern, so a
// central difference over that interval measures a true derivative.
inline bool smooth_around(const SurrogateModel& model, std::span<const Sample> batch,
                          std::size_t c, double step = 1e-4) {
  const auto base = activation_pattern(model, batch);
  SurrogateModel probe = model;
  for (double sign : {1.0, -1.0}) {
    probe.params[c] = model.params[c] + sign * step;
    if (activation_pattern(probe, batch) != base) return false;
  }
  return true;
}

// Random batch of 64x64 noise images with synthetic-style targets.
inline std::vector<Sample> random_batch(std::mt19937_64& rng, const SurrogateShape& shape,
                                        std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Sample> batch(n);
  for (auto& s : batch) {
    s.input.resize(3 * static_cast<std::size_t>(shape.input) * shape.input);
    for (double& v : s.input) v = std::round(u(rng) * 255.0) / 255.0;
    const std::size_t cells = static_cast<std::size_t>(shape.lane_slots) * shape.rows;
    s.target.x.resize(cells);
    s.target.present.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      s.target.present[i] = u(rng) < 0.6 ? 1 : 0;
      s.target.x[i] = s.target.present[i] ? u(rng) : 0.0;
    }
  }
  return batch;
}

}  // namespace badlane::testing
