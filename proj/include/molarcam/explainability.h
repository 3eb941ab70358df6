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

#ifndef MOLARCAM_EXPLAINABILITY_H_
#define MOLARCAM_EXPLAINABILITY_H_

#include <optional>
#include <vector>

#include "molarcam/image.h"
#include "molarcam/imaging.h"
#include "molarcam/model.h"
#include "molarcam/tensor.h"

namespace molarcam {

enum class GradientMode { kAnalytic, kFiniteDifference };

inline constexpr double kFiniteDifferenceStep = 1e-3;

// Grad-CAM channel importances: alpha_k is the spatial mean of
// d logit_c / d A_k(i, j) over the tapped activation A.
struct ChannelWeights {
  std::vector<double> alpha;
};

// Unnormalized single-plane map (any real values).
struct ActivationMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

struct GradCamOptions {
  double step = kFiniteDifferenceStep;
  // Worker threads for finite differences. The result does not depend on it.
  int threads = 1;
};

// Weights at the last_conv tap for an input tensor. Analytic mode needs a
// gap_linear head and gives alpha_k = W[c, k] / (H * W); finite-difference
// mode perturbs each activation cell by +-step through ForwardFromTap.
ChannelWeights GradCamWeights(const GraphModel& model, const Tensor& input,
                              int class_idx, GradientMode mode,
                              const GradCamOptions& options = {});

// Same, for activations already captured at last_conv.
ChannelWeights GradCamWeightsAt(const GraphModel& model,
                                const Tensor& activations, int class_idx,
                                GradientMode mode,
                                const GradCamOptions& options = {});

// raw(i, j) = max(0, sum_k alpha_k * A_k(i, j)). Accepts CxHxW or 1xCxHxW.
ActivationMap Cam(const Tensor& activations, const ChannelWeights& weights);

// Min-max scaling to [0,1]; a constant map becomes all zeros.
Heatmap Normalize(const ActivationMap& raw);

// Bilinear with half-pixel centres.
Heatmap Upsample(const Heatmap& map, int width, int height);

struct Explanation {
  Heatmap heatmap;  // 224x224
  ChannelWeights weights;
  GradientMode mode = GradientMode::kAnalytic;
};

// Captures last_conv for the ROI, weights it for class_idx (analytic when
// the head allows it unless `mode` forces a route), then cam, normalize and
// upsample to 224x224.
Explanation Explain(const GraphModel& model, const RoiPatch& roi,
                    int class_idx, std::optional<GradientMode> mode = {},
                    const GradCamOptions& options = {});

}  // namespace molarcam

#endif  // MOLARCAM_EXPLAINABILITY_H_
