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

#ifndef MOLARCAM_REPORT_JSON_H_
#define MOLARCAM_REPORT_JSON_H_

#include <vector>

#include <json.hpp>

#include "molarcam/classification.h"
#include "molarcam/detection.h"
#include "molarcam/metrics.h"
#include "molarcam/pipeline.h"

namespace molarcam {

// {"box":[x1,y1,x2,y2],"quadrant":"LL","angulation":"mesioangular",
//  "confidence":0.91}
nlohmann::json ToJson(const Detection& d);
Detection DetectionFromJson(const nlohmann::json& j);

// {"p_normal":..,"p_pericoronitis":..,"label":"pericoronitis","threshold":0.5}
nlohmann::json ToJson(const Classification& c);
Classification ClassificationFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const PipelineConfig& c);
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const CaseReport& r);
CaseReport CaseReportFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const DetectionReport& r);
nlohmann::json ToJson(const ClassificationEvaluation& c);
// {"detection":{...},"classification":{"per_class":[...],
//  "confusion":[[tp,fn],[fp,tn]],"auc":..,"roc":[[fpr,tpr],...]}}
nlohmann::json ToJson(const EvaluationReport& r);

// Batch output: {"cases":[...]} plus "evaluation" when computed.
nlohmann::json ToJson(const BatchResult& b);
// Accepts a batch document or a single case report.
std::vector<CaseReport> CaseReportsFromJson(const nlohmann::json& j);

}  // namespace molarcam

#endif  // MOLARCAM_REPORT_JSON_H_
