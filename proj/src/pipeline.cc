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

#include "molarcam/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <thread>
#include <utility>

#include "molarcam/errors.h"
#include "molarcam/explainability.h"
#include "molarcam/imaging.h"
#include "molarcam/png_io.h"

namespace molarcam {
namespace {

template <typename Fn>
auto Stage(std::string_view name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string what = std::string(name) + " stage: " + e.what();
    switch (e.kind()) {
      case ErrorKind::kInput:
        throw InputError(what);
      case ErrorKind::kModel:
        throw ModelError(what);
      case ErrorKind::kInvariant:
        throw InvariantError(what);
    }
    throw;
  }
}

int ExplainClassIndex(ExplainTarget target, CaseLabel predicted) {
  switch (target) {
    case ExplainTarget::kPericoronitis:
      return static_cast<int>(CaseLabel::kPericoronitis);
    case ExplainTarget::kNormal:
      return static_cast<int>(CaseLabel::kNormal);
    case ExplainTarget::kPredicted:
      break;
  }
  return static_cast<int>(predicted);
}

}  // namespace

std::string_view ExplainTargetName(ExplainTarget t) {
  switch (t) {
    case ExplainTarget::kPredicted:
      return "predicted";
    case ExplainTarget::kPericoronitis:
      return "pericoronitis";
    case ExplainTarget::kNormal:
      return "normal";
  }
  return "predicted";
}

std::optional<ExplainTarget> ParseExplainTarget(std::string_view s) {
  if (s == "predicted") return ExplainTarget::kPredicted;
  if (s == "pericoronitis") return ExplainTarget::kPericoronitis;
  if (s == "normal") return ExplainTarget::kNormal;
  return std::nullopt;
}

void PipelineConfig::Validate() const {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw InputError("conf threshold must be in [0,1]");
  }
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) {
    throw InputError("NMS IoU threshold must be in [0,1]");
  }
  if (!(cls_threshold > 0.0 && cls_threshold < 1.0)) {
    throw InputError("classification threshold must be in (0,1)");
  }
  if (!(overlay_alpha >= 0.0 && overlay_alpha <= 1.0)) {
    throw InputError("overlay alpha must be in [0,1]");
  }
}

std::vector<Detection> DetectMolars(const GraphModel& detector, const Image& image,
                                    double conf_threshold, double nms_iou) {
  if (detector.kind() != ModelKind::kDetector) {
    throw ModelError("model kind mismatch: " + detector.identifier() +
                     " is not a detector");
  }
  const LetterboxResult boxed = LetterboxResize(ToGrayscale(image), kDetectorInputSize);
  Tensor input({1, 1, kDetectorInputSize, kDetectorInputSize},
               std::vector<double>(boxed.image.pixels().begin(),
                                   boxed.image.pixels().end()));
  const auto outputs = Forward(detector, input);
  const auto decoded = Decode(outputs.front(), conf_threshold, boxed.transform);
  const auto kept = Nms(decoded, nms_iou);
  return DedupePerQuadrant(kept);
}

CaseReport RunCase(const Image& image, std::string image_name,
                   const GraphModel& detector, const GraphModel& classifier,
                   const PipelineConfig& config,
                   const std::filesystem::path& out_dir, std::string_view stem) {
  config.Validate();
  CaseReport report;
  report.image = std::move(image_name);
  report.detector_id = detector.identifier();
  report.classifier_id = classifier.identifier();
  report.config = config;

  const Image gray = Stage("preprocess", [&] { return ToGrayscale(image); });
  const auto detections = Stage("detect", [&] {
    return DetectMolars(detector, gray, config.conf_threshold, config.nms_iou);
  });

  for (std::size_t i = 0; i < detections.size(); ++i) {
    CaseDetection cd;
    cd.detection = detections[i];
    const RoiPatch roi = Stage("crop", [&] { return CropRoi(gray, cd.detection.box); });
    cd.classification = Stage("classify", [&] {
      return Classify(classifier, roi, config.cls_threshold);
    });
    const int cls = ExplainClassIndex(config.explain_class, cd.classification.label);
    cd.explained_class = static_cast<CaseLabel>(cls);
    const Explanation e = Stage("explain", [&] { return Explain(classifier, roi, cls); });

    const std::string base = std::string(stem) + "_det" + std::to_string(i);
    cd.heatmap_path = base + "_heatmap.png";
    cd.overlay_path = base + "_overlay.png";
    Stage("write", [&] {
      WriteHeatmapPng(out_dir / cd.heatmap_path, e.heatmap);
      WritePng(out_dir / cd.overlay_path,
               RenderOverlay(roi.pixels, e.heatmap, config.overlay_alpha));
      return 0;
    });
    report.detections.push_back(std::move(cd));
  }
  return report;
}

CaseScore ScoreCase(const CaseReport& report) {
  CaseScore s;
  for (const auto& d : report.detections) {
    s.p_pericoronitis = std::max(s.p_pericoronitis, d.classification.scores.p_pericoronitis);
  }
  s.label = Decide({1.0 - s.p_pericoronitis, s.p_pericoronitis}, report.config.cls_threshold);
  return s;
}

ClassificationEvaluation EvaluateClassification(std::span<const double> scores,
                                                std::span<const CaseLabel> predictions,
                                                std::span<const CaseLabel> truths) {
  ClassificationEvaluation out;
  out.confusion = Confusion(predictions, truths);
  out.report = MakeClassReport(out.confusion);
  const bool both = std::count(truths.begin(), truths.end(), CaseLabel::kPericoronitis) > 0 &&
                    std::count(truths.begin(), truths.end(), CaseLabel::kNormal) > 0;
  if (both) out.roc = RocAuc(scores, truths);
  return out;
}

EvaluationReport EvaluateCases(std::span<const CaseReport> cases,
                               std::span<const ManifestEntry> manifest) {
  std::map<std::string, const ManifestEntry*> by_image;
  for (const auto& e : manifest) by_image.emplace(e.image, &e);

  bool any_boxes = false;
  std::vector<ScoredBox> preds;
  std::vector<GroundTruthBox> gts;
  std::vector<double> scores;
  std::vector<CaseLabel> predicted, truths;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const CaseReport& c = cases[i];
    auto it = by_image.find(c.image);
    if (it == by_image.end()) {
      throw InputError("no ground truth entry for image '" + c.image + "'");
    }
    const ManifestEntry& entry = *it->second;
    const int image_id = static_cast<int>(i);
    for (const auto& d : c.detections) {
      preds.push_back({image_id, d.detection.class_index(), d.detection.box,
                       d.detection.confidence});
    }
    for (const auto& g : entry.detections) {
      any_boxes = true;
      gts.push_back({image_id, CompositeIndex(g.quadrant, g.angulation), g.box});
    }
    if (entry.label) {
      const CaseScore s = ScoreCase(c);
      scores.push_back(s.p_pericoronitis);
      predicted.push_back(s.label);
      truths.push_back(*entry.label);
    }
  }
  EvaluationReport report;
  if (any_boxes) report.detection = MapRange(preds, gts);
  if (!truths.empty()) report.classification = EvaluateClassification(scores, predicted, truths);
  return report;
}

BatchResult RunBatch(std::span<const ManifestEntry> manifest,
                     const GraphModel& detector, const GraphModel& classifier,
                     const PipelineConfig& config,
                     const std::filesystem::path& out_dir, int parallelism) {
  config.Validate();
  const std::size_t n = manifest.size();
  BatchResult result;
  result.cases.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const ManifestEntry& e = manifest[i];
        const Image img = Stage("load", [&] { return ReadPng(e.image_path); });
        char prefix[32];
        std::snprintf(prefix, sizeof(prefix), "case%04zu_", i);
        const std::string stem = prefix + e.image_path.stem().string();
        result.cases[i] = RunCase(img, e.image, detector, classifier, config, out_dir, stem);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), 1,
                              std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  const bool has_truth = std::any_of(manifest.begin(), manifest.end(), [](const auto& e) {
    return e.label.has_value() || !e.detections.empty();
  });
  if (has_truth) result.evaluation = EvaluateCases(result.cases, manifest);
  return result;
}

}  // namespace molarcam
