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

#ifndef MOLARCAM_PIPELINE_H_
#define MOLARCAM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molarcam/classification.h"
#include "molarcam/dataset.h"
#include "molarcam/detection.h"
#include "molarcam/image.h"
#include "molarcam/metrics.h"
#include "molarcam/model.h"

namespace molarcam {

// Which class the heatmap explains.
enum class ExplainTarget { kPredicted, kPericoronitis, kNormal };

std::string_view ExplainTargetName(ExplainTarget t);
std::optional<ExplainTarget> ParseExplainTarget(std::string_view s);

struct PipelineConfig {
  double conf_threshold = kDefaultConfThreshold;
  double nms_iou = kDefaultNmsIou;
  double cls_threshold = kDefaultClsThreshold;
  double overlay_alpha = 0.5;
  ExplainTarget explain_class = ExplainTarget::kPredicted;
  std::uint64_t seed = 0;

  // Throws InputError when a threshold is outside its range.
  void Validate() const;
};

struct CaseDetection {
  Detection detection;
  Classification classification;
  CaseLabel explained_class = CaseLabel::kNormal;
  std::string heatmap_path;  // relative to the output folder
  std::string overlay_path;
};

struct CaseReport {
  std::string image;
  std::string detector_id;
  std::string classifier_id;
  PipelineConfig config;
  std::vector<CaseDetection> detections;
};

// Stage 1: grayscale, letterbox to 832, forward, decode, class-aware NMS and
// per-quadrant deduplication.
std::vector<Detection> DetectMolars(const GraphModel& detector, const Image& image,
                                    double conf_threshold, double nms_iou);

// Both stages for one radiograph. Heatmaps (16-bit) and overlays are written
// to out_dir as <stem>_det<i>_heatmap.png / _overlay.png. Errors carry the
// name of the failing stage.
CaseReport RunCase(const Image& image, std::string image_name,
                   const GraphModel& detector, const GraphModel& classifier,
                   const PipelineConfig& config,
                   const std::filesystem::path& out_dir, std::string_view stem);

struct ClassificationEvaluation {
  ConfusionMatrix2 confusion;
  ClassReport report;
  std::optional<RocCurve> roc;  // absent unless both classes occur
};

struct EvaluationReport {
  std::optional<DetectionReport> detection;
  std::optional<ClassificationEvaluation> classification;
};

// Per-case classification summary: the most suspicious detection's
// p_pericoronitis (0 without detections) and the label it implies.
struct CaseScore {
  double p_pericoronitis = 0.0;
  CaseLabel label = CaseLabel::kNormal;
};
CaseScore ScoreCase(const CaseReport& report);

ClassificationEvaluation EvaluateClassification(std::span<const double> scores,
                                                std::span<const CaseLabel> predictions,
                                                std::span<const CaseLabel> truths);

// Pairs each report with the manifest entry naming the same image. Detection
// metrics are computed when any entry carries boxes, classification metrics
// over entries with a label.
EvaluationReport EvaluateCases(std::span<const CaseReport> cases,
                               std::span<const ManifestEntry> manifest);

struct BatchResult {
  std::vector<CaseReport> cases;  // manifest order
  std::optional<EvaluationReport> evaluation;
};

// Cases run on up to `parallelism` threads; output is independent of it.
BatchResult RunBatch(std::span<const ManifestEntry> manifest,
                     const GraphModel& detector, const GraphModel& classifier,
                     const PipelineConfig& config,
                     const std::filesystem::path& out_dir, int parallelism);

}  // namespace molarcam

#endif  // MOLARCAM_PIPELINE_H_
