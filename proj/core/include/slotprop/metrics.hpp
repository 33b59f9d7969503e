// Copyright 2026 The slotprop Authors
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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slotprop/data_model.hpp"
#include "slotprop/interval.hpp"

namespace slotprop {

struct ScoredSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double score = 0.0;
  std::string label;  // empty for class-agnostic proposals
};

using SegmentsByVideo = std::map<std::string, std::vector<ScoredSegment>>;
using GroundTruthByVideo = std::map<std::string, std::vector<GroundTruthInstance>>;

enum class EvalMode { kThumos, kAnet };

struct EvalConfig {
  EvalMode mode = EvalMode::kThumos;
  std::vector<double> tiou_set;      // proposal recall thresholds
  std::vector<int> an_values;        // reported AR@AN points
  std::vector<double> map_tiou_set;  // detection thresholds
  bool video_weighted = false;

  static EvalConfig thumos();  // {0.5:0.05:1.0}, AN {50,100,200,500}, mAP {0.3..0.7}
  static EvalConfig anet();    // {0.5:0.05:0.95}, AN {1,10,50,100}, mAP {0.5,0.75,0.95}
};

/// Fraction of ground-truth instances matched (tIoU >= threshold) by one of the
/// top-`an` proposals of their video. Proposals must be sorted by score. Videos
/// without ground truth are skipped.
double recall_at(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, double tiou_threshold, int an,
                 bool video_weighted = false);

/// AR(AN): mean of recall_at over the configured threshold set.
std::map<int, double> ar_at_an(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt,
                               const EvalConfig& config);

/// AR for AN = 1..100.
std::vector<double> ar_curve(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt,
                             const EvalConfig& config, int max_an = 100);

/// Trapezoidal area under AR(AN) for AN in [1, 100] divided by the span (99), in percent.
double auc_from_curve(const std::vector<double>& ar_by_an);
double auc_ar_an(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, const EvalConfig& config);

/// All-point interpolated average precision per class, averaged over classes,
/// for each threshold. Classes are the union of ground-truth and predicted labels.
std::map<double, double> detection_map(const SegmentsByVideo& detections, const GroundTruthByVideo& gt,
                                       const std::vector<double>& tiou_set);

/// Average precision of one class (detections and gt already filtered).
double average_precision(const SegmentsByVideo& detections, const GroundTruthByVideo& gt, double tiou_threshold);

struct EvalResults {
  std::map<int, double> ar_at_an;
  std::vector<double> curve;  // AR at AN = 1..100
  double auc = 0.0;
  std::map<double, double> map;
};

EvalResults evaluate(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, const EvalConfig& config);

/// Reads a proposal file ({video_id: [{"segment": [s, e], "score": x, "label"?: str}]}).
SegmentsByVideo read_segments(const std::filesystem::path& path);
GroundTruthByVideo ground_truth_of(const AnnotationSet& annotations);

/// {"ar_at_an": {AN: AR}, "auc": x, "map": {tiou: mAP}}
void write_results(const std::filesystem::path& path, const EvalResults& results);
/// CSV with header "AN,AR".
void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& curve);

}  // namespace slotprop
