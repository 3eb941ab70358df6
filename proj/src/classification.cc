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

#include "molarcam/classification.h"

#include <algorithm>
#include <cmath>

#include "molarcam/errors.h"
#include "molarcam/kernels/kernels.h"

namespace molarcam {

std::string_view LabelName(CaseLabel label) {
  return label == CaseLabel::kNormal ? "normal" : "pericoronitis";
}

std::optional<CaseLabel> ParseLabel(std::string_view s) {
  if (s == "normal") return CaseLabel::kNormal;
  if (s == "pericoronitis") return CaseLabel::kPericoronitis;
  return std::nullopt;
}

Tensor Preprocess(const RoiPatch& roi) {
  const Image& px = roi.pixels;
  if (px.width() != kRoiSize || px.height() != kRoiSize || px.channels() != 1) {
    throw InputError("ROI patch must be 224x224 with one channel");
  }
  Tensor t = Tensor::Zeros({1, 1, kRoiSize, kRoiSize});
  kernels::Active().scale_shift(px.pixels().data(), t.data.data(), t.size(),
                                2.0, -1.0);
  return t;
}

ClassScores Softmax(double logit_normal, double logit_pericoronitis) {
  const double m = std::max(logit_normal, logit_pericoronitis);
  const double e0 = std::exp(logit_normal - m);
  const double e1 = std::exp(logit_pericoronitis - m);
  const double sum = e0 + e1;
  return {e0 / sum, e1 / sum};
}

CaseLabel Decide(const ClassScores& scores, double threshold) {
  return scores.p_pericoronitis >= threshold ? CaseLabel::kPericoronitis
                                             : CaseLabel::kNormal;
}

std::pair<double, double> ClassifierLogits(const GraphModel& model,
                                           const Tensor& input) {
  if (model.kind() != ModelKind::kClassifier) {
    throw ModelError("model kind mismatch: " + model.identifier() +
                     " is not a classifier");
  }
  const auto outputs = Forward(model, input);
  const Tensor& logits = outputs.front();
  if (logits.size() != 2) throw ModelError("classifier did not emit 2 logits");
  return {logits.data[0], logits.data[1]};
}

Classification Classify(const GraphModel& model, const RoiPatch& roi,
                        double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InputError("classification threshold must be in (0,1)");
  }
  const auto [l0, l1] = ClassifierLogits(model, Preprocess(roi));
  Classification c;
  c.scores = Softmax(l0, l1);
  c.label = Decide(c.scores, threshold);
  c.threshold = threshold;
  return c;
}

}  // namespace molarcam
