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

#ifndef MOLARCAM_GEOMETRY_H_
#define MOLARCAM_GEOMETRY_H_

#include <algorithm>

namespace molarcam {

// Axis-aligned box in pixel units, corner convention. Valid iff x2 > x1 and
// y2 > y1.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const {
    return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
  }
  bool valid() const { return x2 > x1 && y2 > y1; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline BBox Intersect(const BBox& a, const BBox& b) {
  return {std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2),
          std::min(a.y2, b.y2)};
}

}  // namespace molarcam

#endif  // MOLARCAM_GEOMETRY_H_
