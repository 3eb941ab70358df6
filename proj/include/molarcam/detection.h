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

#ifndef MOLARCAM_DETECTION_H_
#define MOLARCAM_DETECTION_H_

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "molarcam/geometry.h"
#include "molarcam/imaging.h"
#include "molarcam/tensor.h"

namespace molarcam {

enum class Quadrant { kUR = 0, kUL = 1, kLL = 2, kLR = 3 };

// Winter's classification.
enum class Angulation {
  kVertical = 0,
  kMesioangular = 1,
  kHorizontal = 2,
  kDistoangular = 3,
};

inline constexpr int kNumQuadrants = 4;
inline constexpr int kNumAngulations = 4;
inline constexpr int kNumCompositeClasses = kNumQuadrants * kNumAngulations;
// Raw detector rows: cx, cy, w, h, then one score per composite class.
inline constexpr int kDetectorRows = 4 + kNumCompositeClasses;

inline constexpr double kDefaultConfThreshold = 0.25;
inline constexpr double kDefaultNmsIou = 0.45;

struct Detection {
  BBox box;  // original-image coordinates
  Quadrant quadrant = Quadrant::kUR;
  Angulation angulation = Angulation::kVertical;
  double confidence = 0.0;

  int class_index() const {
    return static_cast<int>(quadrant) * kNumAngulations +
           static_cast<int>(angulation);
  }

  friend bool operator==(const Detection&, const Detection&) = default;
};

// index = 4 * quadrant + angulation. Throws InputError outside 0..15.
std::pair<Quadrant, Angulation> CompositeClass(int index);
int CompositeIndex(Quadrant q, Angulation a);

std::string_view QuadrantName(Quadrant q);      // "UR", "UL", "LL", "LR"
std::string_view AngulationName(Angulation a);  // "vertical", ...
std::optional<Quadrant> ParseQuadrant(std::string_view s);
std::optional<Angulation> ParseAngulation(std::string_view s);

// Intersection over union; 0 for disjoint or degenerate boxes.
double Iou(const BBox& a, const BBox& b);

// Decodes a (4+16) x N (optionally 1 x (4+16) x N) detector output. Columns
// whose best class score is >= conf_threshold are kept; boxes are mapped
// back to original coordinates and dropped if they collapse to zero area.
std::vector<Detection> Decode(const Tensor& raw, double conf_threshold,
                              const LetterboxTransform& transform);

// Class-aware greedy suppression. Candidates are visited by confidence
// (descending), then smaller area, then input order.
std::vector<Detection> Nms(std::span<const Detection> detections,
                           double iou_threshold);

// Keeps the most confident detection per quadrant (first one on ties),
// preserving input order.
std::vector<Detection> DedupePerQuadrant(std::span<const Detection> detections);

}  // namespace molarcam

#endif  // MOLARCAM_DETECTION_H_
