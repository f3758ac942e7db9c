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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "badlane/dataset.hpp"
#include "badlane/strategies.hpp"

namespace badlane {

inline constexpr double kDefaultThreshold = 20.0;

struct LaneMatch {
  std::size_t correct = 0;  // C
  std::size_t total = 0;    // S, non-sentinel ground-truth points
  bool operator==(const LaneMatch&) const = default;
};

// Rows where both lanes have a point and |x_pred - x_gt| < threshold.
std::size_t matched_points(const LaneLabel& pred, const LaneLabel& gt, double threshold);

// One-to-one pairing of predicted and ground-truth lanes maximizing the total
// number of matched points (exact, by dynamic programming over subsets of
// predicted lanes; at most 20 predicted lanes).
LaneMatch match_lanes(const ImageRecord& pred, const ImageRecord& gt, double threshold);

struct ImageMetrics {
  std::string raw_file;
  std::size_t correct = 0;       // C_i
  std::size_t total = 0;         // S_i
  std::size_t correct_star = 0;  // C_i*
  std::size_t total_star = 0;    // S_i*
};

struct MetricsReport {
  double acc = 0.0;
  double asr = 0.0;
  std::vector<ImageMetrics> per_image;
  double threshold = kDefaultThreshold;
  std::string condition_tag;
};

// Predictions are looked up by raw_file; a missing or duplicated key throws.
MetricsReport compute_acc(std::span<const ImageRecord> gt, std::span<const ImageRecord> predictions,
                          double threshold = kDefaultThreshold, int jobs = 1);

// Against the poisoned annotations. For LDA every image counts once
// (S_i* = 1) and succeeds (C_i* = 1) when its prediction has no points.
MetricsReport compute_asr(std::span<const ImageRecord> poisoned,
                          std::span<const ImageRecord> predictions, double threshold,
                          StrategyKind strategy, int jobs = 1);

// ACC fields from the first report, ASR fields from the second.
MetricsReport combine_reports(const MetricsReport& acc, const MetricsReport& asr,
                              const std::string& tag);

struct ReportRow {
  std::string tag;
  double acc = 0.0;
  double asr = 0.0;
  bool operator==(const ReportRow&) const = default;
};

// Rows sorted by tag (stable for equal tags).
std::vector<ReportRow> report_rows(std::span<const MetricsReport> reports);
std::string format_report_csv(std::span<const ReportRow> rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);
std::string format_plot_tsv(std::span<const ReportRow> rows);

// Writes the CSV and the (tag, asr) TSV; throws on an empty report list.
void emit_report(std::span<const MetricsReport> reports, const std::filesystem::path& csv,
                 const std::filesystem::path& plot_tsv);

}  // namespace badlane
