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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "badlane/dataset.hpp"

namespace badlane {

enum class StrategyKind { lda, lsa, lra, loa };

StrategyKind parse_strategy(std::string_view name);
std::string_view strategy_name(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::loa;
  double alpha_deg = 4.5;  // LRA rotation angle
  double beta = 60.0;      // LOA horizontal offset, whole pixels
  double lsa_fit_fraction = 0.3;
  double lsa_deviation_tol = 2.0;
  // +1: positive alpha swings the near (bottom) end of a lane toward larger x,
  // which is counter-clockwise as displayed. -1 flips it.
  int rotation_sign = 1;

  void validate() const;
};

// Lane disappearance: every lane slot is emptied.
ImageRecord apply_lda(const ImageRecord& record);
// Lane straightening: least-squares line through the first
// max(2, ceil(fit_fraction * m)) points; points deviating by more than the
// tolerance are moved onto it.
ImageRecord apply_lsa(const ImageRecord& record, const StrategyConfig& cfg);
// Lane rotation about each lane's first (topmost) point.
ImageRecord apply_lra(const ImageRecord& record, const StrategyConfig& cfg);
// Lane offset by beta pixels.
ImageRecord apply_loa(const ImageRecord& record, const StrategyConfig& cfg);
// Points outside [0, width) become sentinels.
ImageRecord clip_points(const ImageRecord& record);

ImageRecord apply_strategy(const ImageRecord& record, const StrategyConfig& cfg);

// Natural cubic spline through (t_i, v_i), t strictly increasing.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::span<const double> t, std::span<const double> v);
  double operator()(double t) const;

 private:
  std::vector<double> t_, v_, m_;  // m_: second derivatives at the knots
};

struct LineFit {
  double slope = 0.0;  // dx/dy
  double intercept = 0.0;
  double operator()(double y) const { return slope * y + intercept; }
};
LineFit fit_line(std::span<const Point> points);

Point rotate_about(Point p, Point pivot, double alpha_deg, int sign = 1);
std::vector<Point> rotate_points(std::span<const Point> points, Point pivot,
                                 double alpha_deg, int sign = 1);

// Spline through the lane points sampled every pixel in y from the first to
// the last point.
std::vector<Point> densify_lane(std::span<const Point> points);

// Dense spline samples of one lane after rotation, before they are snapped
// back onto the h_samples grid. Empty for lanes with fewer than two points.
std::vector<Point> lra_rotated_samples(const ImageRecord& record, std::size_t lane,
                                       const StrategyConfig& cfg);

// x of the polyline at row y, using the first segment (in polyline order)
// whose y-span contains it; kNoPoint when no segment covers y.
double polyline_x_at(std::span<const Point> polyline, double y);

}  // namespace badlane
