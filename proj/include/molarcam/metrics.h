// Copyright 2026 The MolarCam Authors.
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

#ifndef MOLARCAM_METRICS_H_
#define MOLARCAM_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "molarcam/classification.h"
#include "molarcam/geometry.h"

namespace molarcam {

// Pericoronitis is the positive class.
struct ConfusionMatrix2 {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  // Same matrix with Normal as the positive class.
  ConfusionMatrix2 swapped() const { return {tn, fn, fp, tp}; }

  friend bool operator==(const ConfusionMatrix2&, const ConfusionMatrix2&) = default;
};

ConfusionMatrix2 Confusion(std::span<const CaseLabel> predictions,
                           std::span<const CaseLabel> truths);

struct ClassMetrics {
  CaseLabel label = CaseLabel::kNormal;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

// Indexed by CaseLabel: [0] Normal, [1] Pericoronitis.
struct ClassReport {
  std::array<ClassMetrics, 2> per_class;

  const ClassMetrics& operator[](CaseLabel l) const {
    return per_class[static_cast<int>(l)];
  }
};

// 2PR / (P + R), or 0 when P + R == 0.
double F1Score(double precision, double recall);

// Zero denominators give 0.
ClassReport MakeClassReport(const ConfusionMatrix2& cm);

// Half-up rounding to `decimals` places, for display.
double RoundHalfUp(double value, int decimals);

struct RocCurve {
  // (fpr, tpr), thresholds descending; starts at (0,0) and ends at (1,1).
  std::vector<std::pair<double, double>> points;
  double auc = 0.0;
};

// Sweeps every distinct score as a threshold (ties collapse into one step)
// and integrates with the trapezoid rule. Throws InputError when either
// class is absent or the spans differ in length.
RocCurve RocAuc(std::span<const double> scores,
                std::span<const CaseLabel> truths);

// A scored prediction or ground-truth box; `image` groups boxes that may be
// matched against each other and `class_id` is the composite class.
struct ScoredBox {
  int image = 0;
  int class_id = 0;
  BBox box;
  double confidence = 0.0;
};

struct GroundTruthBox {
  int image = 0;
  int class_id = 0;
  BBox box;
};

inline constexpr std::array<double, 10> kIouThresholds{
    0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
inline constexpr int kRecallPoints = 101;

struct MatchResult {
  // Per prediction, in the order visited (confidence descending, then input
  // order): index into the input and whether it matched a ground truth.
  std::vector<std::size_t> order;
  std::vector<bool> true_positive;
  std::int64_t num_ground_truth = 0;
};

// Greedy matching: each prediction takes the unmatched ground truth of the
// same image and class with the highest IoU >= iou_threshold (lowest index on
// ties).
MatchResult MatchDetections(std::span<const ScoredBox> predictions,
                            std::span<const GroundTruthBox> ground_truth,
                            double iou_threshold);

// 101-point interpolated AP. nullopt when there is no ground truth.
std::optional<double> AveragePrecision(std::span<const ScoredBox> predictions,
                                       std::span<const GroundTruthBox> ground_truth,
                                       double iou_threshold);

struct DetectionReport {
  double precision = 0.0;  // at IoU 0.5 over the given predictions
  double recall = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
};

// Classes without ground truth are left out of the means; with no ground
// truth at all every mAP is 0.
DetectionReport MapRange(std::span<const ScoredBox> predictions,
                         std::span<const GroundTruthBox> ground_truth);

}  // namespace molarcam

#endif  // MOLARCAM_METRICS_H_
