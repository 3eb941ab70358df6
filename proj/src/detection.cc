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

#include "molarcam/detection.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "molarcam/errors.h"

namespace molarcam {
namespace {

constexpr std::array<std::string_view, 4> kQuadrantNames{"UR", "UL", "LL", "LR"};
constexpr std::array<std::string_view, 4> kAngulationNames{
    "vertical", "mesioangular", "horizontal", "distoangular"};

}  // namespace

std::pair<Quadrant, Angulation> CompositeClass(int index) {
  if (index < 0 || index >= kNumCompositeClasses) {
    throw InputError("composite class index out of range: " + std::to_string(index));
  }
  return {static_cast<Quadrant>(index / kNumAngulations),
          static_cast<Angulation>(index % kNumAngulations)};
}

int CompositeIndex(Quadrant q, Angulation a) {
  return static_cast<int>(q) * kNumAngulations + static_cast<int>(a);
}

std::string_view QuadrantName(Quadrant q) { return kQuadrantNames[static_cast<int>(q)]; }

std::string_view AngulationName(Angulation a) {
  return kAngulationNames[static_cast<int>(a)];
}

std::optional<Quadrant> ParseQuadrant(std::string_view s) {
  for (int i = 0; i < kNumQuadrants; ++i) {
    if (kQuadrantNames[i] == s) return static_cast<Quadrant>(i);
  }
  return std::nullopt;
}

std::optional<Angulation> ParseAngulation(std::string_view s) {
  for (int i = 0; i < kNumAngulations; ++i) {
    if (kAngulationNames[i] == s) return static_cast<Angulation>(i);
  }
  return std::nullopt;
}

double Iou(const BBox& a, const BBox& b) {
  const double inter = Intersect(a, b).area();
  const double uni = a.area() + b.area() - inter;
  if (inter <= 0.0 || uni <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

std::vector<Detection> Decode(const Tensor& raw, double conf_threshold,
                              const LetterboxTransform& transform) {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw InputError("confidence threshold must be in [0,1]");
  }
  const Shape& s = raw.shape;
  const bool ok = (s.size() == 3 && s[0] == 1 && s[1] == kDetectorRows) ||
                  (s.size() == 2 && s[0] == kDetectorRows);
  if (!ok) {
    throw InputError("malformed detector output " + ShapeToString(s) +
                     ", expected (20,N) or (1,20,N)");
  }
  const std::size_t n = static_cast<std::size_t>(s.back());
  auto at = [&](int row, std::size_t col) { return raw.data[row * n + col]; };

  std::vector<Detection> out;
  for (std::size_t col = 0; col < n; ++col) {
    int best = 0;
    double score = at(4, col);
    for (int c = 1; c < kNumCompositeClasses; ++c) {
      if (at(4 + c, col) > score) {
        score = at(4 + c, col);
        best = c;
      }
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw ModelError("detector score outside [0,1] in column " + std::to_string(col));
    }
    if (score < conf_threshold) continue;
    const double cx = at(0, col), cy = at(1, col);
    const double hw = at(2, col) / 2.0, hh = at(3, col) / 2.0;
    const BBox box = InvertBox({cx - hw, cy - hh, cx + hw, cy + hh}, transform);
    if (!box.valid()) continue;
    const auto [q, a] = CompositeClass(best);
    out.push_back({box, q, a, score});
  }
  return out;
}

std::vector<Detection> Nms(std::span<const Detection> detections,
                           double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const Detection& a = detections[i];
    const Detection& b = detections[j];
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.box.area() < b.box.area();
  });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const Detection& d = detections[i];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_index() == d.class_index() && Iou(k.box, d.box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> DedupePerQuadrant(std::span<const Detection> detections) {
  std::array<int, kNumQuadrants> best;
  best.fill(-1);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const int q = static_cast<int>(detections[i].quadrant);
    if (best[q] < 0 || detections[i].confidence > detections[best[q]].confidence) {
      best[q] = static_cast<int>(i);
    }
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (std::find(best.begin(), best.end(), static_cast<int>(i)) != best.end()) {
      out.push_back(detections[i]);
    }
  }
  return out;
}

}  // namespace molarcam
