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

#include "molarcam/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "molarcam/detection.h"
#include "molarcam/errors.h"

namespace molarcam {
namespace {

double Ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

ClassMetrics PositiveRow(CaseLabel label, const ConfusionMatrix2& cm) {
  ClassMetrics m;
  m.label = label;
  m.precision = Ratio(cm.tp, cm.tp + cm.fp);
  m.recall = Ratio(cm.tp, cm.tp + cm.fn);
  m.f1 = F1Score(m.precision, m.recall);
  m.support = cm.tp + cm.fn;
  return m;
}

}  // namespace

ConfusionMatrix2 Confusion(std::span<const CaseLabel> predictions,
                           std::span<const CaseLabel> truths) {
  if (predictions.size() != truths.size()) {
    throw InputError("confusion: " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix2 cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred = predictions[i] == CaseLabel::kPericoronitis;
    const bool truth = truths[i] == CaseLabel::kPericoronitis;
    if (pred && truth) ++cm.tp;
    else if (pred) ++cm.fp;
    else if (truth) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double F1Score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

ClassReport MakeClassReport(const ConfusionMatrix2& cm) {
  ClassReport r;
  r.per_class[0] = PositiveRow(CaseLabel::kNormal, cm.swapped());
  r.per_class[1] = PositiveRow(CaseLabel::kPericoronitis, cm);
  return r;
}

double RoundHalfUp(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

RocCurve RocAuc(std::span<const double> scores,
                std::span<const CaseLabel> truths) {
  if (scores.size() != truths.size()) {
    throw InputError("roc: scores and truths differ in length");
  }
  std::int64_t pos = 0;
  for (CaseLabel t : truths) pos += t == CaseLabel::kPericoronitis;
  const std::int64_t neg = static_cast<std::int64_t>(truths.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw InputError("roc: both classes must be present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (truths[order[i]] == CaseLabel::kPericoronitis) ++tp;
    else ++fp;
    const bool group_ends =
        i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]];
    if (!group_ends) continue;
    const auto prev = roc.points.back();
    const double fpr = Ratio(fp, neg), tpr = Ratio(tp, pos);
    roc.auc += (fpr - prev.first) * (tpr + prev.second) / 2.0;
    roc.points.emplace_back(fpr, tpr);
  }
  return roc;
}

MatchResult MatchDetections(std::span<const ScoredBox> predictions,
                            std::span<const GroundTruthBox> ground_truth,
                            double iou_threshold) {
  MatchResult r;
  r.num_ground_truth = static_cast<std::int64_t>(ground_truth.size());
  r.order.resize(predictions.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });
  std::vector<bool> taken(ground_truth.size(), false);
  r.true_positive.reserve(predictions.size());
  for (std::size_t idx : r.order) {
    const ScoredBox& p = predictions[idx];
    double best_iou = -1.0;
    std::size_t best = ground_truth.size();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const GroundTruthBox& gt = ground_truth[g];
      if (taken[g] || gt.image != p.image || gt.class_id != p.class_id) continue;
      const double iou = Iou(p.box, gt.box);
      if (iou >= iou_threshold && iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    const bool hit = best < ground_truth.size();
    if (hit) taken[best] = true;
    r.true_positive.push_back(hit);
  }
  return r;
}

std::optional<double> AveragePrecision(std::span<const ScoredBox> predictions,
                                       std::span<const GroundTruthBox> ground_truth,
                                       double iou_threshold) {
  if (ground_truth.empty()) return std::nullopt;
  const MatchResult m = MatchDetections(predictions, ground_truth, iou_threshold);
  const std::size_t n = m.true_positive.size();
  std::vector<double> precision(n), recall(n);
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += m.true_positive[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(m.num_ground_truth);
  }
  // Precision envelope: best precision at this recall or beyond.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int level = 0; level < kRecallPoints; ++level) {
    const double r = static_cast<double>(level) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / static_cast<double>(kRecallPoints);
}

DetectionReport MapRange(std::span<const ScoredBox> predictions,
                         std::span<const GroundTruthBox> ground_truth) {
  DetectionReport report;
  const MatchResult at50 = MatchDetections(predictions, ground_truth, 0.5);
  const auto tp = std::count(at50.true_positive.begin(), at50.true_positive.end(), true);
  report.precision = Ratio(tp, static_cast<std::int64_t>(predictions.size()));
  report.recall = Ratio(tp, static_cast<std::int64_t>(ground_truth.size()));

  std::set<int> classes;
  for (const auto& g : ground_truth) classes.insert(g.class_id);
  if (classes.empty()) return report;

  double sum50 = 0.0, sum_range = 0.0;
  for (int cls : classes) {
    std::vector<ScoredBox> p;
    std::vector<GroundTruthBox> g;
    for (const auto& x : predictions) if (x.class_id == cls) p.push_back(x);
    for (const auto& x : ground_truth) if (x.class_id == cls) g.push_back(x);
    double per_class = 0.0;
    for (double thr : kIouThresholds) {
      const double ap = *AveragePrecision(p, g, thr);
      if (thr == 0.50) sum50 += ap;
      per_class += ap;
    }
    sum_range += per_class / static_cast<double>(kIouThresholds.size());
  }
  report.map50 = sum50 / static_cast<double>(classes.size());
  report.map50_95 = sum_range / static_cast<double>(classes.size());
  return report;
}

}  // namespace molarcam
