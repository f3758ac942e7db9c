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

#include <fstream>
#include <random>
#include <sstream>

#include "badlane/eval.hpp"
#include "test_support.hpp"

namespace badlane {
namespace {

using testing::brute_force_correct;
using testing::brute_force_total;
using testing::perturb_record;
using testing::random_record;

const std::vector<int> kRows{160, 200, 240, 280, 320, 360, 400, 440};

ImageRecord rec(const std::string& name, std::vector<std::vector<double>> lanes) {
  ImageRecord r;
  r.raw_file = name;
  r.h_samples = {10, 20, 30, 40};
  for (auto& l : lanes) r.lanes.push_back({l});
  return r;
}

TEST(MatchLanes, IdentityAndEmpty) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto gt = random_record(rng, kRows, 5, 1280, "a.jpg");
    const auto m = match_lanes(gt, gt, 20);
    EXPECT_EQ(m.correct, m.total);
    EXPECT_EQ(m.total, brute_force_total(gt));
    ImageRecord none = gt;
    for (auto& l : none.lanes) std::fill(l.xs.begin(), l.xs.end(), -2.0);
    EXPECT_EQ(match_lanes(none, gt, 20).correct, 0u);
  }
}

TEST(MatchLanes, EqualsExhaustiveAssignment) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto gt = random_record(rng, kRows, 5, 1280, "b.jpg");
    const auto pred = perturb_record(rng, gt, 5);
    const auto m = match_lanes(pred, gt, 20);
    ASSERT_EQ(m.correct, brute_force_correct(pred, gt, 20)) << i;
    ASSERT_EQ(m.total, brute_force_total(gt));
  }
}

TEST(MatchLanes, GreedyTrapIsSolvedExactly) {
  // Taking the single best pair first (A with gt0, 3 points) leaves B with
  // nothing; crossing over (A with gt1, B with gt0) scores 4.
  ImageRecord gt, pred;
  gt.raw_file = pred.raw_file = "c";
  gt.h_samples = pred.h_samples = {10, 20, 30, 40, 50, 60};
  gt.lanes = {{{100, 100, 100, 100, 100, 100}}, {{300, 300, -2, -2, -2, -2}}};
  pred.lanes = {{{300, 300, 100, 100, 100, -2}}, {{-2, -2, -2, -2, 100, 100}}};
  EXPECT_EQ(match_lanes(pred, gt, 20).correct, 4u);
  EXPECT_EQ(brute_force_correct(pred, gt, 20), 4u);
}

TEST(MatchLanes, StrictThresholdAndGridCheck) {
  const auto gt = rec("d", {{100, 100, 100, 100}});
  EXPECT_EQ(match_lanes(rec("d", {{119.9, 120, 80.1, 80}}), gt, 20).correct, 2u);
  ImageRecord other = gt;
  other.h_samples = {11, 20, 30, 40};
  EXPECT_THROW(match_lanes(other, gt, 20), Error);
}

TEST(Acc, ConstructedFixtures) {
  std::vector<ImageRecord> gt{rec("x.jpg", {{100, 200, 300, 400}, {50, 60, 70, 80}}),
                              rec("y.jpg", {{10, 20, -2, -2}})};
  EXPECT_EQ(compute_acc(gt, gt).acc, 1.0);

  // Half of the points moved 25 px, the rest exact.
  auto half = gt;
  half[0].lanes[0].xs = {125, 225, 300, 400};
  half[0].lanes[1].xs = {75, 85, 70, 80};
  half[1].lanes[0].xs = {35, 20, -2, -2};
  // 10 points in total; 5 displaced.
  const auto r = compute_acc(gt, half);
  EXPECT_DOUBLE_EQ(r.acc, 0.5);
  EXPECT_EQ(r.per_image.size(), 2u);
  EXPECT_EQ(r.per_image[0].total, 8u);

  auto empty = gt;
  for (auto& p : empty) p.lanes.clear();
  EXPECT_EQ(compute_acc(gt, empty).acc, 0.0);
}

TEST(Acc, KeyedByFileAndOrderInvariant) {
  std::mt19937_64 rng(3);
  std::vector<ImageRecord> gt, pred;
  for (int i = 0; i < 40; ++i) {
    gt.push_back(random_record(rng, kRows, 4, 1280, "img" + std::to_string(i) + ".jpg"));
    pred.push_back(perturb_record(rng, gt.back(), 4));
  }
  const double a = compute_acc(gt, pred).acc;
  std::shuffle(pred.begin(), pred.end(), rng);
  EXPECT_EQ(compute_acc(gt, pred, 20, 4).acc, a);

  std::size_t c = 0, s = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto it = std::find_if(pred.begin(), pred.end(),
                                 [&](const ImageRecord& p) { return p.raw_file == gt[i].raw_file; });
    c += brute_force_correct(*it, gt[i], 20);
    s += brute_force_total(gt[i]);
  }
  EXPECT_DOUBLE_EQ(a, double(c) / double(s));

  pred.pop_back();
  try {
    compute_acc(gt, pred);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing prediction for"), std::string::npos);
  }
  pred.push_back(pred.front());
  EXPECT_THROW(compute_acc(gt, pred), Error);
}

TEST(Asr, StrategyCases) {
  std::vector<ImageRecord> clean{rec("x.jpg", {{100, 200, 300, 400}}), rec("y.jpg", {{500, -2, 520, 530}})};
  StrategyConfig loa;
  loa.beta = 60;
  std::vector<ImageRecord> poisoned;
  for (auto r : clean) {
    r.width = 1280;
    poisoned.push_back(apply_strategy(r, loa));
  }
  EXPECT_EQ(compute_asr(poisoned, poisoned, 20, StrategyKind::loa).asr, 1.0);
  EXPECT_EQ(compute_asr(poisoned, clean, 20, StrategyKind::loa).asr, 0.0);

  std::vector<ImageRecord> lda;
  for (const auto& r : clean) lda.push_back(apply_lda(r));
  auto silent = clean;
  for (auto& p : silent) p.lanes.assign(2, LaneLabel{std::vector<double>(4, -2.0)});
  EXPECT_EQ(compute_asr(lda, silent, 20, StrategyKind::lda).asr, 1.0);
  EXPECT_EQ(compute_asr(lda, clean, 20, StrategyKind::lda).asr, 0.0);
  auto mixed = silent;
  mixed[1] = clean[1];
  const auto r = compute_asr(lda, mixed, 20, StrategyKind::lda);
  EXPECT_EQ(r.asr, 0.5);
  EXPECT_EQ(r.per_image[0].total_star, 1u);
  EXPECT_EQ(r.per_image[0].correct_star, 1u);
}

TEST(Report, RowsCsvAndPlot) {
  MetricsReport a, b, c;
  a.condition_tag = "shape";
  a.acc = 0.9;
  a.asr = 1.0 / 3.0;
  b.condition_tag = "origin";
  b.acc = 0.25;
  b.asr = 0.7;
  c.condition_tag = "position";
  c.acc = 0.1;
  c.asr = 0.2;
  const std::vector<MetricsReport> one{a};
  const auto single = format_report_csv(report_rows(one));
  EXPECT_EQ(std::count(single.begin(), single.end(), '\n'), 2);

  const std::vector<MetricsReport> all{a, b, c};
  const auto rows = report_rows(all);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].tag, "origin");
  EXPECT_EQ(rows[1].tag, "position");
  EXPECT_EQ(rows[2].tag, "shape");
  const auto csv = format_report_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tag,acc,asr");
  EXPECT_EQ(parse_report_csv(csv), rows);

  testing::TempDir dir("report");
  emit_report(all, dir / "r.csv", dir / "r.tsv");
  std::ifstream in(dir / "r.tsv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), format_plot_tsv(rows));
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "tag\tasr");
  EXPECT_THROW(emit_report(std::span<const MetricsReport>{}, dir / "e.csv", dir / "e.tsv"), Error);
}

TEST(Report, CombineTakesAccAndAsrFromEachSide) {
  MetricsReport acc, asr;
  acc.acc = 0.8;
  acc.asr = 0.1;
  asr.acc = 0.2;
  asr.asr = 0.9;
  const auto r = combine_reports(acc, asr, "origin");
  EXPECT_EQ(r.acc, 0.8);
  EXPECT_EQ(r.asr, 0.9);
  EXPECT_EQ(r.condition_tag, "origin");
}

}  // namespace
}  // namespace badlane
