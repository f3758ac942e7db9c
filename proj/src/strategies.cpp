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

#include "badlane/strategies.hpp"

#include <cmath>
#include <numbers>

#include "badlane/common.hpp"

namespace badlane {

StrategyKind parse_strategy(std::string_view name) {
  if (name == "lda" || name == "LDA") return StrategyKind::lda;
  if (name == "lsa" || name == "LSA") return StrategyKind::lsa;
  if (name == "lra" || name == "LRA") return StrategyKind::lra;
  if (name == "loa" || name == "LOA") return StrategyKind::loa;
  throw Error("unknown strategy '" + std::string(name) + "' (expected lda, lsa, lra, loa)");
}

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::lda: return "lda";
    case StrategyKind::lsa: return "lsa";
    case StrategyKind::lra: return "lra";
    case StrategyKind::loa: return "loa";
  }
  return "?";
}

void StrategyConfig::validate() const {
  if (!std::isfinite(alpha_deg)) throw Error("alpha must be finite");
  if (kind == StrategyKind::lra && !(std::fabs(alpha_deg) < 90.0))
    throw Error("alpha must satisfy |alpha| < 90 degrees");
  if (!std::isfinite(beta) || beta != std::round(beta))
    throw Error("beta must be a whole number of pixels");
  if (!(lsa_fit_fraction > 0.0 && lsa_fit_fraction <= 1.0))
    throw Error("lsa_fit_fraction must be in (0, 1]");
  if (!(lsa_deviation_tol >= 0.0)) throw Error("lsa_deviation_tol must be >= 0");
  if (rotation_sign != 1 && rotation_sign != -1) throw Error("rotation_sign must be +1 or -1");
}

ImageRecord apply_lda(const ImageRecord& record) {
  ImageRecord out = record;
  for (auto& lane : out.lanes) std::fill(lane.xs.begin(), lane.xs.end(), kNoPoint);
  return out;
}

ImageRecord clip_points(const ImageRecord& record) {
  ImageRecord out = record;
  for (auto& lane : out.lanes)
    for (double& x : lane.xs)
      if (x != kNoPoint && !(is_point(x) && x < record.width)) x = kNoPoint;
  return out;
}

ImageRecord apply_loa(const ImageRecord& record, const StrategyConfig& cfg) {
  ImageRecord out = record;
  for (auto& lane : out.lanes)
    for (double& x : lane.xs) {
      if (!is_point(x)) continue;
      const double moved = x + cfg.beta;
      x = (moved >= 0.0 && moved < record.width) ? moved : kNoPoint;
    }
  return out;
}

LineFit fit_line(std::span<const Point> points) {
  if (points.size() < 2) throw Error("fit_line needs at least two points");
  const double n = static_cast<double>(points.size());
  double my = 0.0, mx = 0.0;
  for (const auto& p : points) {
    my += p.y;
    mx += p.x;
  }
  my /= n;
  mx /= n;
  double syy = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    syy += (p.y - my) * (p.y - my);
    sxy += (p.y - my) * (p.x - mx);
  }
  if (syy == 0.0) throw Error("fit_line: points share one row");
  const double slope = sxy / syy;
  return {slope, mx - slope * my};
}

ImageRecord apply_lsa(const ImageRecord& record, const StrategyConfig& cfg) {
  ImageRecord out = record;
  for (auto& lane : out.lanes) {
    std::vector<Point> pts;
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < lane.xs.size(); ++j)
      if (is_point(lane.xs[j])) {
        pts.push_back({lane.xs[j], static_cast<double>(record.h_samples[j])});
        rows.push_back(j);
      }
    if (pts.size() < 2) continue;
    const auto fit_n = std::min(
        pts.size(),
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(
                                     cfg.lsa_fit_fraction * static_cast<double>(pts.size()) - 1e-9))));
    const LineFit line = fit_line(std::span(pts).first(fit_n));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double on_line = line(pts[i].y);
      if (std::fabs(pts[i].x - on_line) > cfg.lsa_deviation_tol) lane.xs[rows[i]] = on_line;
    }
  }
  return clip_points(out);
}

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> t, std::span<const double> v)
    : t_(t.begin(), t.end()), v_(v.begin(), v.end()), m_(t.size(), 0.0) {
  const std::size_t n = t_.size();
  if (n < 2 || v_.size() != n) throw Error("spline needs at least two knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t_[i] > t_[i - 1])) throw Error("spline knots must be strictly increasing");
  if (n == 2) return;
  // Thomas algorithm on the interior second derivatives.
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((v_[i + 1] - v_[i]) / h1 - (v_[i] - v_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = t_[i + 1] - t_[i];  // h_{i}, sub-diagonal of row i
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
}

double NaturalCubicSpline::operator()(double t) const {
  const std::size_t n = t_.size();
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1);
  const double h = t_[i] - t_[i - 1];
  const double a = (t_[i] - t) / h, b = (t - t_[i - 1]) / h;
  return a * v_[i - 1] + b * v_[i] +
         ((a * a * a - a) * m_[i - 1] + (b * b * b - b) * m_[i]) * h * h / 6.0;
}

Point rotate_about(Point p, Point pivot, double alpha_deg, int sign) {
  const double a = sign * alpha_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  const double dx = p.x - pivot.x, dy = p.y - pivot.y;
  return {pivot.x + dx * c + dy * s, pivot.y - dx * s + dy * c};
}

std::vector<Point> rotate_points(std::span<const Point> points, Point pivot,
                                 double alpha_deg, int sign) {
  std::vector<Point> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(rotate_about(p, pivot, alpha_deg, sign));
  return out;
}

std::vector<Point> densify_lane(std::span<const Point> points) {
  if (points.size() < 2) return {points.begin(), points.end()};
  std::vector<double> ys, xs;
  for (const auto& p : points) {
    ys.push_back(p.y);
    xs.push_back(p.x);
  }
  const NaturalCubicSpline spline(ys, xs);
  std::vector<Point> dense;
  const double y_end = ys.back();
  for (double y = ys.front(); y < y_end; y += 1.0) dense.push_back({spline(y), y});
  dense.push_back({xs.back(), y_end});
  return dense;
}

std::vector<Point> lra_rotated_samples(const ImageRecord& record, std::size_t lane,
                                       const StrategyConfig& cfg) {
  const auto pts = lane_points(record, lane);
  if (pts.size() < 2) return {};
  const auto dense = densify_lane(pts);
  return rotate_points(dense, pts.front(), cfg.alpha_deg, cfg.rotation_sign);
}

double polyline_x_at(std::span<const Point> polyline, double y) {
  if (polyline.size() == 1) return polyline[0].y == y ? polyline[0].x : kNoPoint;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Point& a = polyline[i];
    const Point& b = polyline[i + 1];
    const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
    if (y < lo || y > hi) continue;
    if (a.y == b.y) return a.x;
    return a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
  }
  return kNoPoint;
}

ImageRecord apply_lra(const ImageRecord& record, const StrategyConfig& cfg) {
  ImageRecord out = record;
  for (std::size_t l = 0; l < record.lanes.size(); ++l) {
    const auto rotated = lra_rotated_samples(record, l, cfg);
    if (rotated.empty()) continue;
    auto& xs = out.lanes[l].xs;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (!is_point(xs[j])) continue;
      const double x = polyline_x_at(rotated, record.h_samples[j]);
      xs[j] = std::isfinite(x) && is_point(x) ? x : kNoPoint;
    }
  }
  return clip_points(out);
}

ImageRecord apply_strategy(const ImageRecord& record, const StrategyConfig& cfg) {
  switch (cfg.kind) {
    case StrategyKind::lda: return apply_lda(record);
    case StrategyKind::lsa: return apply_lsa(record, cfg);
    case StrategyKind::lra: return apply_lra(record, cfg);
    case StrategyKind::loa: return apply_loa(record, cfg);
  }
  throw Error("unknown strategy");
}

}  // namespace badlane
