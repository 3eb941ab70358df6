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
#include "molarcam/image.h"

#include <string>

#include "molarcam/errors.h"

namespace molarcam {

Image::Image(int width, int height, int channels, std::vector<double> pixels)
    : width_(width), height_(height), channels_(channels),
      pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw InputError("image dimensions must be positive, got " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InputError("unsupported channel count " + std::to_string(channels));
  }
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * channels;
  if (pixels_.size() != expected) {
    throw InputError("pixel buffer holds " + std::to_string(pixels_.size()) +
                     " values, expected " + std::to_string(expected));
  }
  for (double v : pixels_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError("pixel value outside [0,1]: " + std::to_string(v));
    }
  }
}

Image Image::Filled(int width, int height, int channels, double value) {
  const std::size_t n = static_cast<std::size_t>(width > 0 ? width : 0) *
                        (height > 0 ? height : 0) * (channels > 0 ? channels : 0);
  return Image(width, height, channels, std::vector<double>(n, value));
}

}  // namespace molarcam
