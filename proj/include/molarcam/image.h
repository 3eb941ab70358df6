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
#ifndef MOLARCAM_IMAGE_H_
#define MOLARCAM_IMAGE_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace molarcam {

// Row-major raster with interleaved channels and values in [0,1]. Immutable
// once built; construction validates the buffer.
class Image {
 public:
  Image() = default;

  // Throws InputError unless width, height > 0, channels is 1 or 3, the
  // buffer holds width*height*channels values and every value is in [0,1].
  Image(int width, int height, int channels, std::vector<double> pixels);

  static Image Filled(int width, int height, int channels, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }
  std::span<const double> pixels() const { return pixels_; }

  double at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  // Consumes the image. Used by builders that post-process a copy.
  std::vector<double> release() && { return std::move(pixels_); }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> pixels_;
};

// Single-channel activation map with values in [0,1].
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

}  // namespace molarcam

#endif  // MOLARCAM_IMAGE_H_
