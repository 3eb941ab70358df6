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
#include "molarcam/imaging.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "molarcam/errors.h"
#include "molarcam/kernels/kernels.h"

namespace molarcam {
namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

std::vector<std::vector<double>> SplitPlanes(const Image& img) {
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  const int c = img.channels();
  std::vector<std::vector<double>> planes(c, std::vector<double>(n));
  auto px = img.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < c; ++k) planes[k][i] = px[i * c + k];
  }
  return planes;
}

std::vector<double> MergePlanes(const std::vector<std::vector<double>>& planes) {
  const std::size_t c = planes.size();
  const std::size_t n = planes.front().size();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[i * c + k] = planes[k][i];
  }
  return out;
}

struct Tap {
  int lo = 0;
  int hi = 0;
  double weight = 0.0;
};

// Sample positions src = origin + (u + 0.5) * step - 0.5, clamped to the edge.
std::vector<Tap> AxisTaps(int out_size, int in_size, double origin,
                          double step) {
  std::vector<Tap> taps(out_size);
  const double last = static_cast<double>(in_size - 1);
  for (int u = 0; u < out_size; ++u) {
    double s = origin + (u + 0.5) * step - 0.5;
    s = std::clamp(s, 0.0, last);
    const int lo = static_cast<int>(std::floor(s));
    taps[u] = {lo, std::min(lo + 1, in_size - 1), s - lo};
  }
  return taps;
}

std::vector<double> Resample(std::span<const double> plane, int width,
                             int height, int out_width, int out_height,
                             double origin_x, double step_x, double origin_y,
                             double step_y) {
  const auto& k = kernels::Active();
  const auto xs = AxisTaps(out_width, width, origin_x, step_x);
  const auto ys = AxisTaps(out_height, height, origin_y, step_y);

  std::vector<double> wx(out_width);
  for (int u = 0; u < out_width; ++u) wx[u] = xs[u].weight;

  // Horizontal pass over one source row, cached by row index.
  std::vector<double> left(out_width), right(out_width);
  auto horizontal = [&](int row, std::vector<double>& dst) {
    const double* src = plane.data() + static_cast<std::size_t>(row) * width;
    for (int u = 0; u < out_width; ++u) {
      left[u] = src[xs[u].lo];
      right[u] = src[xs[u].hi];
    }
    k.lerp(left.data(), right.data(), wx.data(), dst.data(), out_width);
  };

  std::vector<double> out(static_cast<std::size_t>(out_width) * out_height);
  std::vector<double> top(out_width), bottom(out_width);
  int top_row = -1, bottom_row = -1;
  for (int v = 0; v < out_height; ++v) {
    const Tap& ty = ys[v];
    if (ty.lo != top_row) {
      if (ty.lo == bottom_row) {
        std::swap(top, bottom);
        std::swap(top_row, bottom_row);
      } else {
        horizontal(ty.lo, top);
        top_row = ty.lo;
      }
    }
    if (ty.hi != bottom_row) {
      horizontal(ty.hi, bottom);
      bottom_row = ty.hi;
    }
    k.blend(top.data(), bottom.data(),
            out.data() + static_cast<std::size_t>(v) * out_width, out_width,
            ty.weight);
  }
  return out;
}

void ClampUnit(std::vector<double>& values) {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

Image ToGrayscale(const Image& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) {
    throw InputError("to_grayscale: unsupported channel count " +
                     std::to_string(img.channels()));
  }
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  auto px = img.pixels();
  std::vector<double> gray(n);
  for (std::size_t i = 0; i < n; ++i) {
    gray[i] = kLumaR * px[3 * i] + kLumaG * px[3 * i + 1] +
              kLumaB * px[3 * i + 2];
  }
  ClampUnit(gray);
  return Image(img.width(), img.height(), 1, std::move(gray));
}

std::vector<double> ResizePlane(std::span<const double> plane, int width,
                                int height, int out_width, int out_height) {
  if (width <= 0 || height <= 0 || out_width <= 0 || out_height <= 0) {
    throw InputError("resize: dimensions must be positive");
  }
  return Resample(plane, width, height, out_width, out_height, 0.0,
                  static_cast<double>(width) / out_width, 0.0,
                  static_cast<double>(height) / out_height);
}

LetterboxResult LetterboxResize(const Image& img, int target) {
  if (target <= 0) throw InputError("letterbox: target must be positive");
  if (img.empty()) throw InputError("letterbox: zero-dimension input");

  LetterboxTransform t;
  t.orig_width = img.width();
  t.orig_height = img.height();
  t.target = target;
  t.scale = static_cast<double>(target) / std::max(img.width(), img.height());
  const int new_w = std::clamp(
      static_cast<int>(std::lround(img.width() * t.scale)), 1, target);
  const int new_h = std::clamp(
      static_cast<int>(std::lround(img.height() * t.scale)), 1, target);
  t.pad_x = (target - new_w + 1) / 2;
  t.pad_y = (target - new_h + 1) / 2;

  const int c = img.channels();
  const auto planes = SplitPlanes(img);
  std::vector<std::vector<double>> out_planes(
      c, std::vector<double>(static_cast<std::size_t>(target) * target,
                             kLetterboxPad));
  for (int k = 0; k < c; ++k) {
    const auto content =
        ResizePlane(planes[k], img.width(), img.height(), new_w, new_h);
    for (int y = 0; y < new_h && y + t.pad_y < target; ++y) {
      const int cols = std::min(new_w, target - t.pad_x);
      std::copy_n(content.begin() + static_cast<std::ptrdiff_t>(y) * new_w,
                  cols,
                  out_planes[k].begin() +
                      static_cast<std::ptrdiff_t>(y + t.pad_y) * target +
                      t.pad_x);
    }
  }
  auto merged = MergePlanes(out_planes);
  ClampUnit(merged);
  return {Image(target, target, c, std::move(merged)), t};
}

BBox ForwardBox(const BBox& box, const LetterboxTransform& t) {
  return {box.x1 * t.scale + t.pad_x, box.y1 * t.scale + t.pad_y,
          box.x2 * t.scale + t.pad_x, box.y2 * t.scale + t.pad_y};
}

BBox InvertBox(const BBox& box, const LetterboxTransform& t) {
  const double w = t.orig_width;
  const double h = t.orig_height;
  auto fx = [&](double x) { return std::clamp((x - t.pad_x) / t.scale, 0.0, w); };
  auto fy = [&](double y) { return std::clamp((y - t.pad_y) / t.scale, 0.0, h); };
  return {fx(box.x1), fy(box.y1), fx(box.x2), fy(box.y2)};
}

RoiPatch CropRoi(const Image& img, const BBox& box) {
  const BBox frame{0.0, 0.0, static_cast<double>(img.width()),
                   static_cast<double>(img.height())};
  const BBox clamped = Intersect(box, frame);
  if (!clamped.valid()) {
    throw InputError("crop_roi: box lies outside the image");
  }
  const Image gray = ToGrayscale(img);
  const double bw = clamped.width();
  const double bh = clamped.height();
  const double scale = kRoiSize / std::min(bw, bh);
  const double off_x = (bw * scale - kRoiSize) / 2.0;
  const double off_y = (bh * scale - kRoiSize) / 2.0;

  RoiPatch roi;
  roi.source_box = clamped;
  roi.crop_transform = {scale, clamped.x1 + off_x / scale,
                        clamped.y1 + off_y / scale};
  auto values = Resample(gray.pixels(), gray.width(), gray.height(), kRoiSize,
                         kRoiSize, roi.crop_transform.origin_x, 1.0 / scale,
                         roi.crop_transform.origin_y, 1.0 / scale);
  ClampUnit(values);
  roi.pixels = Image(kRoiSize, kRoiSize, 1, std::move(values));
  return roi;
}

std::array<double, 3> Colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops{{
      {0.0, 0.0, 0.5},
      {0.0, 0.5, 1.0},
      {0.0, 1.0, 0.5},
      {1.0, 1.0, 0.0},
      {1.0, 0.0, 0.0},
  }};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int seg = std::min(static_cast<int>(pos), 3);
  const double f = pos - seg;
  std::array<double, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = kStops[seg][c] + f * (kStops[seg + 1][c] - kStops[seg][c]);
  }
  return rgb;
}

Image RenderOverlay(const Image& img, const Heatmap& map, double alpha) {
  if (map.width != img.width() || map.height != img.height()) {
    throw InputError("render_overlay: heatmap is " + std::to_string(map.width) +
                     "x" + std::to_string(map.height) + ", image is " +
                     std::to_string(img.width()) + "x" +
                     std::to_string(img.height()));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InputError("render_overlay: alpha must be in [0,1]");
  }
  const Image gray = ToGrayscale(img);
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  std::vector<std::vector<double>> color(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto rgb = Colormap(map.values[i]);
    for (int c = 0; c < 3; ++c) color[c][i] = rgb[c];
  }
  const auto& k = kernels::Active();
  std::vector<std::vector<double>> out(3, std::vector<double>(n));
  for (int c = 0; c < 3; ++c) {
    k.blend(gray.pixels().data(), color[c].data(), out[c].data(), n, alpha);
  }
  auto merged = MergePlanes(out);
  ClampUnit(merged);
  return Image(img.width(), img.height(), 3, std::move(merged));
}

Augmented HorizontalFlip(const Image& img, std::span<const BBox> boxes) {
  const int w = img.width(), h = img.height(), c = img.channels();
  std::vector<double> px(img.pixels().size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < c; ++k) {
        px[(static_cast<std::size_t>(y) * w + (w - 1 - x)) * c + k] =
            img.at(x, y, k);
      }
    }
  }
  Augmented out{Image(w, h, c, std::move(px)), {}};
  out.boxes.reserve(boxes.size());
  for (const BBox& b : boxes) out.boxes.push_back({w - b.x2, b.y1, w - b.x1, b.y2});
  return out;
}

Augmented Rotate(const Image& img, std::span<const BBox> boxes, int degrees) {
  if (degrees != 90 && degrees != 180 && degrees != 270) {
    throw InputError("rotate: unsupported angle " + std::to_string(degrees));
  }
  const int w = img.width(), h = img.height(), c = img.channels();
  const int out_w = degrees == 180 ? w : h;
  const int out_h = degrees == 180 ? h : w;
  std::vector<double> px(img.pixels().size());
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      int sx = 0, sy = 0;
      switch (degrees) {
        case 90:
          sx = y;
          sy = h - 1 - x;
          break;
        case 180:
          sx = w - 1 - x;
          sy = h - 1 - y;
          break;
        default:
          sx = w - 1 - y;
          sy = x;
          break;
      }
      for (int k = 0; k < c; ++k) {
        px[(static_cast<std::size_t>(y) * out_w + x) * c + k] = img.at(sx, sy, k);
      }
    }
  }
  Augmented out{Image(out_w, out_h, c, std::move(px)), {}};
  out.boxes.reserve(boxes.size());
  const double W = w, H = h;
  for (const BBox& b : boxes) {
    switch (degrees) {
      case 90:
        out.boxes.push_back({H - b.y2, b.x1, H - b.y1, b.x2});
        break;
      case 180:
        out.boxes.push_back({W - b.x2, H - b.y2, W - b.x1, H - b.y1});
        break;
      default:
        out.boxes.push_back({b.y1, W - b.x2, b.y2, W - b.x1});
        break;
    }
  }
  return out;
}

MosaicResult Mosaic(std::span<const Image, 4> images,
                    std::span<const std::vector<BBox>, 4> boxes,
                    std::uint64_t seed) {
  const int w = images[0].width(), h = images[0].height();
  const int c = images[0].channels();
  for (const Image& img : images) {
    if (img.width() != w || img.height() != h || img.channels() != c) {
      throw InputError("mosaic: inputs must share one size and channel count");
    }
  }
  std::mt19937_64 rng(seed);
  MosaicResult out;
  out.split_x = w / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(w + 1));
  out.split_y = h / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(h + 1));
  const int cx = out.split_x, cy = out.split_y;
  const int cw = 2 * w, ch = 2 * h;

  struct Tile {
    int ox, oy;
    BBox region;
  };
  const std::array<Tile, 4> tiles{{
      {cx - w, cy - h, {0.0, 0.0, double(cx), double(cy)}},
      {cx, cy - h, {double(cx), 0.0, double(cw), double(cy)}},
      {cx - w, cy, {0.0, double(cy), double(cx), double(ch)}},
      {cx, cy, {double(cx), double(cy), double(cw), double(ch)}},
  }};

  std::vector<double> px(static_cast<std::size_t>(cw) * ch * c, kLetterboxPad);
  for (int t = 0; t < 4; ++t) {
    const Tile& tile = tiles[t];
    for (int y = int(tile.region.y1); y < int(tile.region.y2); ++y) {
      const int sy = y - tile.oy;
      if (sy < 0 || sy >= h) continue;
      for (int x = int(tile.region.x1); x < int(tile.region.x2); ++x) {
        const int sx = x - tile.ox;
        if (sx < 0 || sx >= w) continue;
        for (int k = 0; k < c; ++k) {
          px[(static_cast<std::size_t>(y) * cw + x) * c + k] =
              images[t].at(sx, sy, k);
        }
      }
    }
    const BBox extent{double(tile.ox), double(tile.oy), double(tile.ox + w),
                      double(tile.oy + h)};
    const BBox visible = Intersect(tile.region, extent);
    for (std::size_t i = 0; i < boxes[t].size(); ++i) {
      const BBox& b = boxes[t][i];
      const BBox shifted{b.x1 + tile.ox, b.y1 + tile.oy, b.x2 + tile.ox,
                         b.y2 + tile.oy};
      const BBox kept = Intersect(shifted, visible);
      if (!kept.valid()) continue;
      if (kept.area() < kMosaicMinRetention * b.area()) continue;
      out.boxes.push_back({kept, t, static_cast<int>(i)});
    }
  }
  out.image = Image(cw, ch, c, std::move(px));
  return out;
}

}  // namespace molarcam
