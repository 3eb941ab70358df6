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

#include "molarcam/report_json.h"

#include <string>

#include "molarcam/errors.h"

namespace molarcam {

using nlohmann::json;

namespace {

template <typename T>
T Require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(std::string("report field \"") + key + "\" is missing");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("report field \"") + key + "\" has the wrong type");
  }
}

CaseLabel RequireLabel(const json& j, const char* key) {
  const std::string s = Require<std::string>(j, key);
  const auto label = ParseLabel(s);
  if (!label) throw InputError("unknown label '" + s + "'");
  return *label;
}

}  // namespace

json ToJson(const Detection& d) {
  return {{"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}},
          {"quadrant", QuadrantName(d.quadrant)},
          {"angulation", AngulationName(d.angulation)},
          {"confidence", d.confidence}};
}

Detection DetectionFromJson(const json& j) {
  Detection d;
  const auto box = Require<std::vector<double>>(j, "box");
  if (box.size() != 4) throw InputError("detection box must have 4 numbers");
  d.box = {box[0], box[1], box[2], box[3]};
  const std::string q = Require<std::string>(j, "quadrant");
  const std::string a = Require<std::string>(j, "angulation");
  const auto quadrant = ParseQuadrant(q);
  const auto angulation = ParseAngulation(a);
  if (!quadrant) throw InputError("unknown quadrant '" + q + "'");
  if (!angulation) throw InputError("unknown angulation '" + a + "'");
  d.quadrant = *quadrant;
  d.angulation = *angulation;
  d.confidence = Require<double>(j, "confidence");
  return d;
}

json ToJson(const Classification& c) {
  return {{"p_normal", c.scores.p_normal},
          {"p_pericoronitis", c.scores.p_pericoronitis},
          {"label", LabelName(c.label)},
          {"threshold", c.threshold}};
}

Classification ClassificationFromJson(const json& j) {
  Classification c;
  c.scores.p_normal = Require<double>(j, "p_normal");
  c.scores.p_pericoronitis = Require<double>(j, "p_pericoronitis");
  c.label = RequireLabel(j, "label");
  c.threshold = Require<double>(j, "threshold");
  return c;
}

json ToJson(const PipelineConfig& c) {
  return {{"conf_threshold", c.conf_threshold},
          {"nms_iou", c.nms_iou},
          {"cls_threshold", c.cls_threshold},
          {"overlay_alpha", c.overlay_alpha},
          {"explain_class", ExplainTargetName(c.explain_class)},
          {"seed", c.seed}};
}

PipelineConfig PipelineConfigFromJson(const json& j) {
  PipelineConfig c;
  c.conf_threshold = Require<double>(j, "conf_threshold");
  c.nms_iou = Require<double>(j, "nms_iou");
  c.cls_threshold = Require<double>(j, "cls_threshold");
  c.overlay_alpha = Require<double>(j, "overlay_alpha");
  const std::string target = Require<std::string>(j, "explain_class");
  const auto parsed = ParseExplainTarget(target);
  if (!parsed) throw InputError("unknown explain_class '" + target + "'");
  c.explain_class = *parsed;
  c.seed = Require<std::uint64_t>(j, "seed");
  return c;
}

json ToJson(const CaseReport& r) {
  json dets = json::array();
  for (const auto& d : r.detections) {
    json j = ToJson(d.detection);
    j["classification"] = ToJson(d.classification);
    j["explained_class"] = LabelName(d.explained_class);
    j["heatmap"] = d.heatmap_path;
    j["overlay"] = d.overlay_path;
    dets.push_back(std::move(j));
  }
  return {{"image", r.image},
          {"models", {{"detector", r.detector_id}, {"classifier", r.classifier_id}}},
          {"config", ToJson(r.config)},
          {"detections", std::move(dets)}};
}

CaseReport CaseReportFromJson(const json& j) {
  CaseReport r;
  r.image = Require<std::string>(j, "image");
  if (j.contains("models")) {
    r.detector_id = j["models"].value("detector", std::string());
    r.classifier_id = j["models"].value("classifier", std::string());
  }
  r.config = PipelineConfigFromJson(Require<json>(j, "config"));
  for (const json& d : Require<json>(j, "detections")) {
    CaseDetection cd;
    cd.detection = DetectionFromJson(d);
    cd.classification = ClassificationFromJson(Require<json>(d, "classification"));
    cd.explained_class = RequireLabel(d, "explained_class");
    cd.heatmap_path = Require<std::string>(d, "heatmap");
    cd.overlay_path = Require<std::string>(d, "overlay");
    r.detections.push_back(std::move(cd));
  }
  return r;
}

json ToJson(const DetectionReport& r) {
  return {{"precision", r.precision},
          {"recall", r.recall},
          {"map50", r.map50},
          {"map50_95", r.map50_95}};
}

json ToJson(const ClassificationEvaluation& c) {
  json per_class = json::array();
  for (const ClassMetrics& m : c.report.per_class) {
    per_class.push_back({{"class", LabelName(m.label)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  json out{{"per_class", std::move(per_class)},
           {"confusion", {{c.confusion.tp, c.confusion.fn}, {c.confusion.fp, c.confusion.tn}}}};
  if (c.roc) {
    json roc = json::array();
    for (const auto& [fpr, tpr] : c.roc->points) roc.push_back({fpr, tpr});
    out["auc"] = c.roc->auc;
    out["roc"] = std::move(roc);
  } else {
    out["auc"] = nullptr;
    out["roc"] = json::array();
  }
  return out;
}

json ToJson(const EvaluationReport& r) {
  json out = json::object();
  out["detection"] = r.detection ? ToJson(*r.detection) : json(nullptr);
  out["classification"] = r.classification ? ToJson(*r.classification) : json(nullptr);
  return out;
}

json ToJson(const BatchResult& b) {
  json cases = json::array();
  for (const auto& c : b.cases) cases.push_back(ToJson(c));
  json out{{"cases", std::move(cases)}};
  if (b.evaluation) out["evaluation"] = ToJson(*b.evaluation);
  return out;
}

std::vector<CaseReport> CaseReportsFromJson(const json& j) {
  std::vector<CaseReport> out;
  if (j.is_object() && j.contains("cases")) {
    for (const json& c : j["cases"]) out.push_back(CaseReportFromJson(c));
  } else {
    out.push_back(CaseReportFromJson(j));
  }
  return out;
}

}  // namespace molarcam
