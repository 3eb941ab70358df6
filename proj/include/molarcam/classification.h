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

#ifndef MOLARCAM_CLASSIFICATION_H_
#define MOLARCAM_CLASSIFICATION_H_

#include <optional>
#include <string_view>

#include "molarcam/imaging.h"
#include "molarcam/model.h"
#include "molarcam/tensor.h"

namespace molarcam {

enum class CaseLabel { kNormal = 0, kPericoronitis = 1 };

inline constexpr double kDefaultClsThreshold = 0.5;

std::string_view LabelName(CaseLabel label);  // "normal" / "pericoronitis"
std::optional<CaseLabel> ParseLabel(std::string_view s);

// Probability pair in logit order (normal, pericoronitis).
struct ClassScores {
  double p_normal = 0.5;
  double p_pericoronitis = 0.5;

  double operator[](int cls) const { return cls == 0 ? p_normal : p_pericoronitis; }
};

struct Classification {
  ClassScores scores;
  CaseLabel label = CaseLabel::kNormal;
  double threshold = kDefaultClsThreshold;
};

// 1x1x224x224 tensor with pixels standardized as (p - 0.5) / 0.5.
Tensor Preprocess(const RoiPatch& roi);

// Max-subtracted softmax over two logits.
ClassScores Softmax(double logit_normal, double logit_pericoronitis);

// Pericoronitis iff p_pericoronitis >= threshold.
CaseLabel Decide(const ClassScores& scores, double threshold);

// threshold must lie in (0,1); the model must be a classifier.
Classification Classify(const GraphModel& model, const RoiPatch& roi,
                        double threshold = kDefaultClsThreshold);

// Logits for an already-preprocessed input.
std::pair<double, double> ClassifierLogits(const GraphModel& model,
                                           const Tensor& input);

}  // namespace molarcam

#endif  // MOLARCAM_CLASSIFICATION_H_
