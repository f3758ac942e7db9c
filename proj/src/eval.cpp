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


#include "badlane/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "badlane/common.hpp"

namespace badlane {

namespace {

constexpr std::size_t kMaxPredLanes = 20;

std::unordered_map<std::string, std::size_t> index_predictions(
    std::span<const ImageRecord> predictions) {
  std::unordered_map<std::string, std::size_t> by_file;
  by_file.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (!by_file.emplace(predictions[i].raw_file, i).second)
      throw Error("duplicate prediction for " + predictions[i].raw_file);
  return by_file;
}

const ImageRecord& lookup(const std::unordered_map<std::string, std::size_t>& by_file,
                          std::span<const ImageRecord> predictions, const std::string& key) {
  const auto it = by_file.find(key);
  if (it == by_file.end()) throw Error("missing prediction for " + key);
  return predictions[it->second];
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t matched_points(const LaneLabel& pred, const LaneLabel& gt, double threshold) {
  if (pred.xs.size() != gt.xs.size()) throw Error("lane length mismatch");
  std::size_t n = 0;
  for (std::size_t j = 0; j < gt.xs.size(); ++j)
    if (is_point(gt.xs[j]) && is_point(pred.xs[j]) && std::abs(pred.xs[j] - gt.xs[j]) < threshold)
      ++n;
  return n;
}

LaneMatch match_lanes(const ImageRecord& pred, const ImageRecord& gt, double threshold) {
  if (pred.h_samples != gt.h_samples)
    throw Error("h_samples mismatch for " + gt.raw_file);
  LaneMatch out;
  for (const auto& lane : gt.lanes)
    out.total += static_cast<std::size_t>(std::count_if(lane.xs.begin(), lane.xs.end(), is_point));

  // Predicted lanes without points can never match; drop them up front.
  std::vector<const LaneLabel*> preds;
  for (const auto& lane : pred.lanes)
    if (std::any_of(lane.xs.begin(), lane.xs.end(), is_point)) preds.push_back(&lane);
  if (preds.empty() || gt.lanes.empty()) return out;
  if (preds.size() > kMaxPredLanes) throw Error("too many predicted lanes in " + pred.raw_file);

  const std::size_t np = preds.size();
  std::vector<std::vector<std::size_t>> score(gt.lanes.size(), std::vector<std::size_t>(np));
  for (std::size_t g = 0; g < gt.lanes.size(); ++g)
    for (std::size_t p = 0; p < np; ++p)
      score[g][p] = matched_points(*preds[p], gt.lanes[g], threshold);

  // best[mask]: max matched points over the gt lanes seen so far using
  // exactly the predicted lanes in mask (or fewer, by leaving gt unpaired).
  const std::size_t states = std::size_t{1} << np;
  std::vector<long long> best(states, -1), next(states);
  best[0] = 0;
  for (std::size_t g = 0; g < gt.lanes.size(); ++g) {
    next = best;  // gt lane g unpaired
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (best[mask] < 0) continue;
      for (std::size_t p = 0; p < np; ++p) {
        if (mask & (std::size_t{1} << p)) continue;
        const std::size_t to = mask | (std::size_t{1} << p);
        next[to] = std::max(next[to], best[mask] + static_cast<long long>(score[g][p]));
      }
    }
    best.swap(next);
  }
  out.correct = static_cast<std::size_t>(*std::max_element(best.begin(), best.end()));
  return out;
}

MetricsReport compute_acc(std::span<const ImageRecord> gt, std::span<const ImageRecord> predictions,
                          double threshold, int jobs) {
  const auto by_file = index_predictions(predictions);
  MetricsReport report;
  report.threshold = threshold;
  report.per_image.resize(gt.size());
  std::vector<const ImageRecord*> matched(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i)
    matched[i] = &lookup(by_file, predictions, gt[i].raw_file);
  parallel_for(gt.size(), jobs, [&](std::size_t i) {
    const LaneMatch m = match_lanes(*matched[i], gt[i], threshold);
    report.per_image[i] = {gt[i].raw_file, m.correct, m.total, 0, 0};
  });
  std::size_t c = 0, s = 0;
  for (const auto& im : report.per_image) {
    c += im.correct;
    s += im.total;
  }
  report.acc = s == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(s);
  return report;
}

MetricsReport compute_asr(std::span<const ImageRecord> poisoned,
                          std::span<const ImageRecord> predictions, double threshold,
                          StrategyKind strategy, int jobs) {
  const auto by_file = index_predictions(predictions);
  MetricsReport report;
  report.threshold = threshold;
  report.per_image.resize(poisoned.size());
  std::vector<const ImageRecord*> matched(poisoned.size());
  for (std::size_t i = 0; i < poisoned.size(); ++i)
    matched[i] = &lookup(by_file, predictions, poisoned[i].raw_file);
  parallel_for(poisoned.size(), jobs, [&](std::size_t i) {
    ImageMetrics& im = report.per_image[i];
    im.raw_file = poisoned[i].raw_file;
    if (strategy == StrategyKind::lda) {
      if (matched[i]->h_samples != poisoned[i].h_samples)
        throw Error("h_samples mismatch for " + poisoned[i].raw_file);
      im.total_star = 1;
      im.correct_star = count_points(*matched[i]) == 0 ? 1 : 0;
    } else {
      const LaneMatch m = match_lanes(*matched[i], poisoned[i], threshold);
      im.correct_star = m.correct;
      im.total_star = m.total;
    }
  });
  std::size_t c = 0, s = 0;
  for (const auto& im : report.per_image) {
    c += im.correct_star;
    s += im.total_star;
  }
  report.asr = s == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(s);
  return report;
}

MetricsReport combine_reports(const MetricsReport& acc, const MetricsReport& asr,
                              const std::string& tag) {
  MetricsReport out;
  out.acc = acc.acc;
  out.asr = asr.asr;
  out.threshold = acc.threshold;
  out.condition_tag = tag;
  const std::size_t n = std::max(acc.per_image.size(), asr.per_image.size());
  out.per_image.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ImageMetrics& im = out.per_image[i];
    if (i < acc.per_image.size()) {
      im.raw_file = acc.per_image[i].raw_file;
      im.correct = acc.per_image[i].correct;
      im.total = acc.per_image[i].total;
    }
    if (i < asr.per_image.size()) {
      if (im.raw_file.empty()) im.raw_file = asr.per_image[i].raw_file;
      im.correct_star = asr.per_image[i].correct_star;
      im.total_star = asr.per_image[i].total_star;
    }
  }
  return out;
}

std::vector<ReportRow> report_rows(std::span<const MetricsReport> reports) {
  std::vector<ReportRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) rows.push_back({r.condition_tag, r.acc, r.asr});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.tag < b.tag; });
  return rows;
}

std::string format_report_csv(std::span<const ReportRow> rows) {
  std::string out = "tag,acc,asr\n";
  for (const auto& r : rows)
    out += r.tag + ',' + format_double(r.acc) + ',' + format_double(r.asr) + '\n';
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "tag,acc,asr") throw Error("report header mismatch");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos) throw Error("malformed report row: " + line);
    try {
      rows.push_back({line.substr(0, a), std::stod(line.substr(a + 1, b - a - 1)),
                      std::stod(line.substr(b + 1))});
    } catch (const std::logic_error&) {
      throw Error("malformed report row: " + line);
    }
  }
  return rows;
}

std::string format_plot_tsv(std::span<const ReportRow> rows) {
  std::string out = "tag\tasr\n";
  for (const auto& r : rows) out += r.tag + '\t' + format_double(r.asr) + '\n';
  return out;
}

void emit_report(std::span<const MetricsReport> reports, const std::filesystem::path& csv,
                 const std::filesystem::path& plot_tsv) {
  if (reports.empty()) throw Error("no reports to emit");
  const auto rows = report_rows(reports);
  for (const auto& [path, text] :
       {std::pair{csv, format_report_csv(rows)}, std::pair{plot_tsv, format_plot_tsv(rows)}}) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
  }
}

}  // namespace badlane
