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

#ifndef MOLARCAM_REFERENCE_NETS_H_
#define MOLARCAM_REFERENCE_NETS_H_

#include <cstdint>

#include "molarcam/model.h"

namespace molarcam {

// Weight stream for the reference networks:
//   x_{n+1} = (1103515245 * x_n + 12345) mod 2^31, x_0 = 42,
//   weight  = (x / 2^31 - 0.5) / 5.
// The first weight comes from x_1.
class LcgWeights {
 public:
  explicit LcgWeights(std::uint64_t seed = 42) : state_(seed) {}

  std::uint64_t NextRaw() {
    state_ = (1103515245ULL * state_ + 12345ULL) % (1ULL << 31);
    return state_;
  }
  double Next() {
    return (static_cast<double>(NextRaw()) / 2147483648.0 - 0.5) / 5.0;
  }

 private:
  std::uint64_t state_;
};

enum class ReferenceKind { kDetectorStub, kClassifierStub };

// classifier_stub: 1x1x224x224 -> AveragePool 14/14 -> conv3x3(4, pad 1,
// no bias) -> ReLU -> maxpool 2x2 -> conv3x3(8, pad 1, no bias) -> ReLU
// (last_conv, 8x8x8) -> GAP -> linear to 2 logits. Weights are consumed
// from LcgWeights as conv1, conv2, fc weight, fc bias.
//
// detector_stub: 1x1x832x832 -> maxpool 32/32 (grid_features, 26x26) ->
// 1x1 conv to 16 class logits -> + fixed quadrant prior -> Sigmoid, and 1x1 conv to 4 box offsets
// added to a fixed anchor grid (cell centres, 64x64 boxes); concatenated
// and reshaped to 1x20x676.
GraphModel ReferenceNet(ReferenceKind kind);

}  // namespace molarcam

#endif  // MOLARCAM_REFERENCE_NETS_H_
