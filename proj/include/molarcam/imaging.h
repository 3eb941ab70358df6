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
#ifndef MOLARCAM_IMAGING_H_
#define MOLARCAM_IMAGING_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "molarcam/geometry.h"
#include "molarcam/image.h"

namespace molarcam {

inline constexpr int kDetectorInputSize = 832;
inline constexpr int kRoiSize = 224;
// Border fill for the letterbox, about 114/255.
inline constexpr double kLetterboxPad = 0.447;
// Fraction of a box's area that must survive a mosaic crop for it to be kept.
inline constexpr double kMosaicMinRetention = 0.25;

// Maps original-image coordinates into a target x target letterboxed frame:
// letterbox = original * scale + pad.
struct LetterboxTransform {
  double scale = 1.0;
  int pad_x = 0;
  int pad_y = 0;
  int orig_width = 0;
  int orig_height = 0;
  int target = 0;
};

struct LetterboxResult {
  Image image;
  LetterboxTransform transform;
};

// Maps patch coordinates back to the source image:
// original = origin + patch / scale.
struct CropTransform {
  double scale = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  double to_original_x(double u) const { return origin_x + u / scale; }
  double to_original_y(double v) const { return origin_y + v / scale; }
};

// A 224x224 single-channel crop tied to the detection it came from.
struct RoiPatch {
  Image pixels;
  BBox source_box;
  CropTransform crop_transform;
};

// BT.601 luma for RGB input; 1-channel input is returned unchanged.
Image ToGrayscale(const Image& img);

// Aspect-preserving resize onto a target x target canvas filled with
// kLetterboxPad. scale = target / max(w, h); the leading pad is
// ceil((target - round(side * scale)) / 2).
LetterboxResult LetterboxResize(const Image& img, int target);

// Original coordinates to letterbox coordinates (no clamping).
BBox ForwardBox(const BBox& box, const LetterboxTransform& t);

// Letterbox coordinates to original coordinates, clamped to the image.
BBox InvertBox(const BBox& box, const LetterboxTransform& t);

// Crops the box (clamped to the image), scales the shorter side to 224 and
// center-crops to 224x224. Colour input is converted to luma first.
RoiPatch CropRoi(const Image& img, const BBox& box);

// Separable bilinear resampling with half-pixel centres and edge clamping.
// Works on a single plane of width*height values.
std::vector<double> ResizePlane(std::span<const double> plane, int width,
                                int height, int out_width, int out_height);

// Blue -> cyan -> yellow -> red, piecewise linear over five control points.
std::array<double, 3> Colormap(double t);

// (1 - alpha) * gray-as-rgb + alpha * Colormap(map), 3 channels out.
Image RenderOverlay(const Image& img, const Heatmap& map, double alpha);

struct Augmented {
  Image image;
  std::vector<BBox> boxes;
};

Augmented HorizontalFlip(const Image& img, std::span<const BBox> boxes);

// Clockwise rotation by 90, 180 or 270 degrees.
Augmented Rotate(const Image& img, std::span<const BBox> boxes, int degrees);

struct MosaicBox {
  BBox box;
  int tile = 0;    // which input image the box came from
  int index = 0;   // position of the box within that image's list
};

struct MosaicResult {
  Image image;
  std::vector<MosaicBox> boxes;
  int split_x = 0;
  int split_y = 0;
};

// Tiles four equally sized images onto a 2w x 2h canvas around a seeded
// split point. Boxes are clipped to their tile's region and dropped when
// less than kMosaicMinRetention of their area survives.
MosaicResult Mosaic(std::span<const Image, 4> images,
                    std::span<const std::vector<BBox>, 4> boxes,
                    std::uint64_t seed);

}  // namespace molarcam

#endif  // MOLARCAM_IMAGING_H_
