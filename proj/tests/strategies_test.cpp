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

#include <cmath>
#include <numbers>

#include "badlane/strategies.hpp"
#include "test_support.hpp"

namespace badlane {
namespace {

ImageRecord make_record(std::vector<int> rows, std::vector<std::vector<double>> lanes,
                        int width = 1280) {
  ImageRecord r;
  r.raw_file = "r.jpg";
  r.h_samples = std::move(rows);
  r.width = width;
  r.height = 720;
  for (auto& xs : lanes) r.lanes.push_back(LaneLabel{std::move(xs)});
  return r;
}

// Angle at vertex o between rays o->a and o->b, in degrees.
double angle_deg(Point o, Point a, Point b) {
  const double ax = a.x - o.x, ay = a.y - o.y, bx = b.x - o.x, by = b.y - o.y;
  const double cosv = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
  return std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

StrategyConfig cfg_of(StrategyKind kind) {
  StrategyConfig c;
  c.kind = kind;
  return c;
}

TEST(Lda, EmptiesEveryLane) {
  const auto r = make_record({240, 250, 260}, {{1, 2, 3}, {-2, 5, 6}, {7, -2, 9}});
  const auto out = apply_lda(r);
  ASSERT_EQ(out.lanes.size(), 3u);
  EXPECT_EQ(count_points(out), 0u);
  EXPECT_EQ(out.h_samples, r.h_samples);
  EXPECT_EQ(apply_lda(out), out);
  const auto none = make_record({1}, {});
  EXPECT_EQ(apply_lda(none), none);
}

TEST(Loa, OffsetArithmetic) {
  auto c = cfg_of(StrategyKind::loa);
  c.beta = 60;
  const auto out = apply_loa(make_record({240}, {{500}}), c);
  EXPECT_EQ(out.lanes[0].xs[0], 560.0);
  c.beta = 0;
  const auto r = make_record({240, 250}, {{500, -2}});
  EXPECT_EQ(apply_loa(r, c), r);
}

TEST(Loa, InverseOnUnclippedPoints) {
  const auto data = generate_synthetic_dataset(200, 128, 128, 4);
  auto fwd = cfg_of(StrategyKind::loa);
  fwd.beta = 12;
  auto back = fwd;
  back.beta = -12;
  for (const auto& r : data.dataset.records) {
    const auto moved = apply_loa(r, fwd);
    const auto round_trip = apply_loa(moved, back);
    for (std::size_t l = 0; l < r.lanes.size(); ++l)
      for (std::size_t j = 0; j < r.h_samples.size(); ++j) {
        if (!is_point(moved.lanes[l].xs[j])) continue;
        ASSERT_EQ(moved.lanes[l].xs[j], r.lanes[l].xs[j] + 12);
        ASSERT_EQ(round_trip.lanes[l].xs[j], r.lanes[l].xs[j]);
      }
  }
}

TEST(Clip, OutOfBoundsBecomeSentinel) {
  const auto r = make_record({1, 2, 3}, {{1285, -3, 10}});
  const auto out = clip_points(r);
  EXPECT_EQ(out.lanes[0].xs, (std::vector<double>{-2, -2, 10}));
  EXPECT_EQ(clip_points(out), out);
  const auto ok = make_record({1, 2}, {{0, 1279}});
  EXPECT_EQ(clip_points(ok), ok);
}

TEST(Lsa, StraightLaneIsFixedPoint) {
  const auto r = make_record({240, 250, 260, 270}, {{100, 110, 120, 130}});
  EXPECT_EQ(apply_lsa(r, cfg_of(StrategyKind::lsa)), r);
}

TEST(Lsa, HandFitThroughTwoPoints) {
  auto c = cfg_of(StrategyKind::lsa);
  c.lsa_fit_fraction = 2.0 / 3.0;
  c.lsa_deviation_tol = 5;
  const auto out = apply_lsa(make_record({240, 250, 260}, {{100, 110, 200}}), c);
  // Line through (100,240) and (110,250): x = y - 140.
  EXPECT_DOUBLE_EQ(out.lanes[0].xs[2], 120.0);
  EXPECT_EQ(out.lanes[0].xs[0], 100.0);
  EXPECT_EQ(out.lanes[0].xs[1], 110.0);
}

TEST(Lsa, ShortLanesUnchanged) {
  const auto r = make_record({240, 250, 260}, {{-2, 110, -2}});
  EXPECT_EQ(apply_lsa(r, cfg_of(StrategyKind::lsa)), r);
}

TEST(Lsa, CurvedLanesBecomeCollinear) {
  const auto data = generate_synthetic_dataset(100, 128, 128, 6);
  const auto c = cfg_of(StrategyKind::lsa);
  for (const auto& r : data.dataset.records) {
    const auto out = apply_lsa(r, c);
    for (std::size_t l = 0; l < out.lanes.size(); ++l) {
      const auto before = lane_points(r, l);
      if (before.size() < 2) continue;
      const std::size_t fit_n =
          std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.3 * before.size())));
      // Independent least squares on the prefix.
      double sy = 0, sx = 0, syy = 0, sxy = 0;
      for (std::size_t i = 0; i < fit_n; ++i) {
        sy += before[i].y;
        sx += before[i].x;
        syy += before[i].y * before[i].y;
        sxy += before[i].y * before[i].x;
      }
      const double n = static_cast<double>(fit_n);
      const double slope = (n * sxy - sy * sx) / (n * syy - sy * sy);
      const double icpt = (sx - slope * sy) / n;
      for (const auto& p : lane_points(out, l))
        ASSERT_LE(std::fabs(p.x - (slope * p.y + icpt)), c.lsa_deviation_tol + 1e-6);
    }
  }
}

TEST(Spline, InterpolatesKnotsAndLines) {
  const std::vector<double> t{0, 1, 3, 4, 7}, v{2, -1, 5, 0, 3};
  const NaturalCubicSpline s(t, v);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(s(t[i]), v[i], 1e-12);
  const std::vector<double> lt{0, 2, 5, 9}, lv{1, 5, 11, 19};
  const NaturalCubicSpline line(lt, lv);
  for (double x = 0; x <= 9; x += 0.25) EXPECT_NEAR(line(x), 2 * x + 1, 1e-12);
}

TEST(Spline, NaturalEndConditions) {
  const std::vector<double> t{0, 1, 2, 3}, v{0, 1, 0, 1};
  const NaturalCubicSpline s(t, v);
  const double h = 1e-3;
  for (double e : {0.0, 3.0}) {
    const double x = e == 0.0 ? h : 3.0 - h;
    const double second = (s(x + h) - 2 * s(x) + s(x - h)) / (h * h);
    EXPECT_NEAR(second, 0.0, 0.05);
  }
}

TEST(Lra, ZeroAngleIsIdentity) {
  const auto data = generate_synthetic_dataset(50, 128, 128, 8);
  auto c = cfg_of(StrategyKind::lra);
  c.alpha_deg = 0;
  for (const auto& r : data.dataset.records) {
    const auto out = apply_lra(r, c);
    for (std::size_t l = 0; l < r.lanes.size(); ++l)
      for (std::size_t j = 0; j < r.h_samples.size(); ++j) {
        if (!is_point(r.lanes[l].xs[j])) {
          ASSERT_FALSE(is_point(out.lanes[l].xs[j]));
          continue;
        }
        ASSERT_NEAR(out.lanes[l].xs[j], r.lanes[l].xs[j], 1e-6);
      }
  }
}

TEST(Lra, VerticalLaneAngle) {
  auto c = cfg_of(StrategyKind::lra);
  c.alpha_deg = 4.5;
  const auto r = make_record({200, 300}, {{100, 100}});
  const auto samples = lra_rotated_samples(r, 0, c);
  const Point p1{100, 200}, p{100, 300};
  const Point moved = samples.back();
  EXPECT_NEAR(angle_deg(p1, moved, p), 4.5, 0.1);
  // Positive alpha with the default sign moves the near end toward +x.
  EXPECT_GT(moved.x, 100.0);
}

TEST(Lra, AngleHoldsForEverySample) {
  const auto data = generate_synthetic_dataset(30, 128, 128, 10);
  for (double alpha : {-10.0, -4.5, 4.5, 10.0}) {
    auto c = cfg_of(StrategyKind::lra);
    c.alpha_deg = alpha;
    for (const auto& r : data.dataset.records)
      for (std::size_t l = 0; l < r.lanes.size(); ++l) {
        const auto pts = lane_points(r, l);
        if (pts.size() < 2) continue;
        const auto dense = densify_lane(pts);
        const auto rot = lra_rotated_samples(r, l, c);
        ASSERT_EQ(dense.size(), rot.size());
        for (std::size_t j = 1; j < dense.size(); ++j)
          ASSERT_NEAR(angle_deg(pts.front(), rot[j], dense[j]), std::fabs(alpha), 0.1);
      }
  }
}

TEST(Lra, InverseRotationRecoversSamples) {
  const auto data = generate_synthetic_dataset(30, 128, 128, 12);
  auto c = cfg_of(StrategyKind::lra);
  c.alpha_deg = 7.0;
  for (const auto& r : data.dataset.records)
    for (std::size_t l = 0; l < r.lanes.size(); ++l) {
      const auto pts = lane_points(r, l);
      if (pts.size() < 2) continue;
      const auto dense = densify_lane(pts);
      const auto back = rotate_points(lra_rotated_samples(r, l, c), pts.front(), -7.0);
      for (std::size_t j = 0; j < dense.size(); ++j) {
        ASSERT_NEAR(back[j].x, dense[j].x, 1e-6);
        ASSERT_NEAR(back[j].y, dense[j].y, 1e-6);
      }
    }
}

TEST(Lra, OutputStaysOnGridAndInBounds) {
  const auto data = generate_synthetic_dataset(50, 64, 64, 14);
  auto c = cfg_of(StrategyKind::lra);
  c.alpha_deg = 10;
  for (const auto& r : data.dataset.records) {
    const auto out = apply_lra(r, c);
    ASSERT_EQ(out.h_samples, r.h_samples);
    ASSERT_EQ(out.lanes.size(), r.lanes.size());
    for (const auto& lane : out.lanes)
      for (double x : lane.xs)
        if (is_point(x)) {
          ASSERT_LT(x, 64.0);
        }
  }
}

TEST(Lra, SignFlipMirrorsRotation) {
  auto pos = cfg_of(StrategyKind::lra);
  pos.alpha_deg = 5;
  auto neg = pos;
  neg.rotation_sign = -1;
  auto minus = pos;
  minus.alpha_deg = -5;
  const auto r = make_record({200, 250, 300}, {{100, 110, 125}});
  EXPECT_EQ(apply_lra(r, neg), apply_lra(r, minus));
}

TEST(Strategy, ParseAndValidate) {
  EXPECT_EQ(parse_strategy("lra"), StrategyKind::lra);
  EXPECT_EQ(parse_strategy("LOA"), StrategyKind::loa);
  EXPECT_THROW(parse_strategy("xyz"), Error);
  auto c = cfg_of(StrategyKind::lra);
  c.alpha_deg = 90;
  EXPECT_THROW(c.validate(), Error);
  c = cfg_of(StrategyKind::loa);
  c.beta = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = cfg_of(StrategyKind::lsa);
  c.lsa_fit_fraction = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Strategy, AllPreserveGridAndLaneCount) {
  const auto data = generate_synthetic_dataset(40, 64, 64, 16);
  for (auto kind : {StrategyKind::lda, StrategyKind::lsa, StrategyKind::lra, StrategyKind::loa}) {
    auto c = cfg_of(kind);
    c.beta = 12;
    for (const auto& r : data.dataset.records) {
      const auto out = apply_strategy(r, c);
      ASSERT_EQ(out.h_samples, r.h_samples);
      ASSERT_EQ(out.lanes.size(), r.lanes.size());
      ASSERT_EQ(apply_strategy(r, c), out);
    }
  }
}

}  // namespace
}  // namespace badlane
