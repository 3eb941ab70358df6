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

#include "molarcam/explainability.h"

#include <algorithm>
#include <string>
#include <thread>

#include "molarcam/classification.h"
#include "molarcam/errors.h"
#include "molarcam/kernels/kernels.h"

namespace molarcam {
namespace {

struct TapDims {
  std::int64_t channels, height, width;
};

TapDims DimsOf(const Shape& s) {
  if (s.size() == 4 && s[0] == 1) return {s[1], s[2], s[3]};
  if (s.size() == 3) return {s[0], s[1], s[2]};
  throw InputError("activations must be CxHxW or 1xCxHxW, got " + ShapeToString(s));
}

void CheckClass(const GraphModel& model, int class_idx) {
  const auto shapes = model.output_shapes();
  const auto classes = NumElements(shapes.front());
  if (class_idx < 0 || class_idx >= classes) {
    throw InputError("class index " + std::to_string(class_idx) + " out of range");
  }
}

double Logit(const GraphModel& model, const Tensor& activations, int class_idx) {
  return ForwardFromTap(model, kLastConvTap, activations).front().data[class_idx];
}

}  // namespace

ChannelWeights GradCamWeightsAt(const GraphModel& model,
                                const Tensor& activations, int class_idx,
                                GradientMode mode,
                                const GradCamOptions& options) {
  if (!model.has_tap(kLastConvTap)) {
    throw ModelError("model has no 'last_conv' tap");
  }
  CheckClass(model, class_idx);
  const TapDims d = DimsOf(model.tap_shape(kLastConvTap));
  const std::int64_t plane = d.height * d.width;
  ChannelWeights w;
  w.alpha.resize(d.channels);

  if (mode == GradientMode::kAnalytic) {
    const auto& head = model.gap_linear();
    if (!head) {
      throw ModelError("analytic Grad-CAM needs a gap_linear head; " +
                       model.identifier() + " is opaque");
    }
    for (std::int64_t k = 0; k < d.channels; ++k) {
      w.alpha[k] = head->weight(class_idx, static_cast<int>(k)) /
                   static_cast<double>(plane);
    }
    return w;
  }

  if (!(options.step > 0.0)) throw InputError("finite-difference step must be positive");
  const std::size_t cells = static_cast<std::size_t>(d.channels * plane);
  if (activations.size() != cells) {
    throw ModelError("shape mismatch: activations do not match last_conv");
  }
  std::vector<double> grad(cells);
  auto worker = [&](std::size_t begin, std::size_t end) {
    Tensor probe = activations;
    for (std::size_t i = begin; i < end; ++i) {
      const double orig = probe.data[i];
      probe.data[i] = orig + options.step;
      const double up = Logit(model, probe, class_idx);
      probe.data[i] = orig - options.step;
      const double down = Logit(model, probe, class_idx);
      probe.data[i] = orig;
      grad[i] = (up - down) / (2.0 * options.step);
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, cells);
  if (threads == 1) {
    worker(0, cells);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (cells + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(cells, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  for (std::int64_t k = 0; k < d.channels; ++k) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < plane; ++i) sum += grad[k * plane + i];
    w.alpha[k] = sum / static_cast<double>(plane);
  }
  return w;
}

ChannelWeights GradCamWeights(const GraphModel& model, const Tensor& input,
                              int class_idx, GradientMode mode,
                              const GradCamOptions& options) {
  const std::string tap(kLastConvTap);
  const auto captured = ForwardWithTaps(model, input, std::span(&tap, 1));
  return GradCamWeightsAt(model, captured.activations.at(tap), class_idx, mode,
                          options);
}

ActivationMap Cam(const Tensor& activations, const ChannelWeights& weights) {
  const TapDims d = DimsOf(activations.shape);
  if (static_cast<std::int64_t>(weights.alpha.size()) != d.channels) {
    throw InputError("channel weights have " + std::to_string(weights.alpha.size()) +
                     " entries, activations have " + std::to_string(d.channels) +
                     " channels");
  }
  const std::size_t plane = static_cast<std::size_t>(d.height * d.width);
  ActivationMap raw{static_cast<int>(d.width), static_cast<int>(d.height),
                    std::vector<double>(plane, 0.0)};
  const auto& k = kernels::Active();
  for (std::int64_t c = 0; c < d.channels; ++c) {
    k.axpy(weights.alpha[c], activations.data.data() + c * plane,
           raw.values.data(), plane);
  }
  k.relu(raw.values.data(), plane);
  return raw;
}

Heatmap Normalize(const ActivationMap& raw) {
  Heatmap out{raw.width, raw.height, std::vector<double>(raw.values.size(), 0.0)};
  if (raw.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(raw.values.begin(), raw.values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    out.values[i] = std::clamp((raw.values[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

Heatmap Upsample(const Heatmap& map, int width, int height) {
  Heatmap out{width, height,
              ResizePlane(map.values, map.width, map.height, width, height)};
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Explanation Explain(const GraphModel& model, const RoiPatch& roi,
                    int class_idx, std::optional<GradientMode> mode,
                    const GradCamOptions& options) {
  const std::string tap(kLastConvTap);
  const auto captured = ForwardWithTaps(model, Preprocess(roi), std::span(&tap, 1));
  const Tensor& activations = captured.activations.at(tap);
  Explanation e;
  e.mode = mode.value_or(model.gap_linear() ? GradientMode::kAnalytic
                                            : GradientMode::kFiniteDifference);
  e.weights = GradCamWeightsAt(model, activations, class_idx, e.mode, options);
  e.heatmap = Upsample(Normalize(Cam(activations, e.weights)), kRoiSize, kRoiSize);
  return e;
}

}  // namespace molarcam
