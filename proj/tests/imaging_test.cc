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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "molarcam/errors.h"
#include "molarcam/imaging.h"
#include "molarcam/png_io.h"
#include "test_util.h"

namespace molarcam {
namespace {

using testing::RandomImage;
using testing::TempDir;

std::vector<double> Sorted(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

void ExpectBoxNear(const BBox& a, const BBox& b, double tol) {
  EXPECT_NEAR(a.x1, b.x1, tol);
  EXPECT_NEAR(a.y1, b.y1, tol);
  EXPECT_NEAR(a.x2, b.x2, tol);
  EXPECT_NEAR(a.y2, b.y2, tol);
}

TEST(Image, RejectsInvalidBuffers) {
  EXPECT_THROW(Image(0, 4, 1, {}), InputError);
  EXPECT_THROW(Image(2, 2, 2, std::vector<double>(8, 0.0)), InputError);
  EXPECT_THROW(Image(2, 2, 1, std::vector<double>(3, 0.0)), InputError);
  EXPECT_THROW(Image(1, 1, 1, {1.5}), InputError);
  EXPECT_NO_THROW(Image(1, 1, 3, {0.0, 1.0, 0.5}));
}

TEST(Grayscale, SingleChannelIsUnchanged) {
  std::mt19937_64 rng(1);
  const Image img = RandomImage(rng, 5, 4, 1);
  EXPECT_EQ(ToGrayscale(img), img);
}

TEST(Grayscale, LumaCoefficients) {
  EXPECT_DOUBLE_EQ(ToGrayscale(Image(1, 1, 3, {1.0, 1.0, 1.0})).at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ToGrayscale(Image(1, 1, 3, {1.0, 0.0, 0.0})).at(0, 0), 0.299);
  EXPECT_DOUBLE_EQ(ToGrayscale(Image(1, 1, 3, {0.0, 1.0, 0.0})).at(0, 0), 0.587);
}

TEST(Grayscale, Idempotent) {
  std::mt19937_64 rng(2);
  const Image g = ToGrayscale(RandomImage(rng, 9, 7, 3));
  EXPECT_EQ(ToGrayscale(g), g);
}

TEST(Letterbox, IdentityForSquareTarget) {
  const auto r = LetterboxResize(Image::Filled(832, 832, 1, 0.3), 832);
  EXPECT_EQ(r.transform.scale, 1.0);
  EXPECT_EQ(r.transform.pad_x, 0);
  EXPECT_EQ(r.transform.pad_y, 0);
  EXPECT_EQ(r.image.width(), 832);
}

TEST(Letterbox, WideImageHalvesAndPadsVertically) {
  const auto r = LetterboxResize(Image::Filled(1664, 832, 1, 0.3), 832);
  EXPECT_EQ(r.transform.scale, 0.5);
  EXPECT_EQ(r.transform.pad_x, 0);
  EXPECT_EQ(r.transform.pad_y, 208);
  EXPECT_DOUBLE_EQ(r.image.at(10, 10), kLetterboxPad);
  EXPECT_DOUBLE_EQ(r.image.at(10, 400), 0.3);
}

TEST(Letterbox, SmallImageUpscales) {
  const auto r = LetterboxResize(Image::Filled(100, 50, 1, 0.3), 832);
  EXPECT_DOUBLE_EQ(r.transform.scale, 8.32);
  EXPECT_EQ(r.transform.pad_x, 0);
  EXPECT_EQ(r.transform.pad_y, 208);
  EXPECT_EQ(r.image.width(), 832);
  EXPECT_EQ(r.image.height(), 832);
}

TEST(Letterbox, PaddingAbsorbsOddRemainder) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> side(1, 2000);
  for (int i = 0; i < 300; ++i) {
    const int w = side(rng), h = side(rng);
    const auto r = LetterboxResize(Image::Filled(w, h, 1, 0.0), 832);
    const auto& t = r.transform;
    const long sw = std::lround(w * t.scale), sh = std::lround(h * t.scale);
    EXPECT_TRUE(sw + 2 * t.pad_x == 832 || sw + 2 * t.pad_x == 833) << w << "x" << h;
    EXPECT_TRUE(sh + 2 * t.pad_y == 832 || sh + 2 * t.pad_y == 833) << w << "x" << h;
  }
}

TEST(Letterbox, ZeroTargetRejected) {
  EXPECT_THROW(LetterboxResize(Image::Filled(4, 4, 1, 0.0), 0), InputError);
  EXPECT_THROW(LetterboxResize(Image(), 832), InputError);
}

TEST(InvertBox, IdentityTransform) {
  LetterboxTransform t{1.0, 0, 0, 832, 832, 832};
  const BBox b{10, 20, 30, 40};
  EXPECT_EQ(InvertBox(b, t), b);
}

TEST(InvertBox, UndoesScaleAndPad) {
  LetterboxTransform t{0.5, 0, 208, 1664, 832, 832};
  EXPECT_EQ(InvertBox({0, 208, 832, 624}, t), (BBox{0, 0, 1664, 832}));
}

TEST(InvertBox, ClampsToImage) {
  LetterboxTransform t{0.5, 0, 208, 1664, 832, 832};
  EXPECT_EQ(InvertBox({-10, 0, 900, 832}, t), (BBox{0, 0, 1664, 832}));
}

TEST(InvertBox, RoundTripWithinHalfPixel) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> side(16, 4000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const int w = side(rng), h = side(rng);
    const auto t = LetterboxResize(Image::Filled(w, h, 1, 0.0), 64).transform;
    const double x1 = u(rng) * (w - 1), y1 = u(rng) * (h - 1);
    const BBox b{x1, y1, x1 + u(rng) * (w - x1), y1 + u(rng) * (h - y1)};
    ExpectBoxNear(InvertBox(ForwardBox(b, t), t), b, 0.5);
  }
}

TEST(CropRoi, SameSizeBoxCopiesPixels) {
  std::mt19937_64 rng(5);
  const Image img = RandomImage(rng, 300, 260, 1);
  const RoiPatch p = CropRoi(img, {10, 20, 234, 244});
  ASSERT_EQ(p.pixels.width(), 224);
  for (int y = 0; y < 224; y += 17) {
    for (int x = 0; x < 224; x += 13) EXPECT_DOUBLE_EQ(p.pixels.at(x, y), img.at(x + 10, y + 20));
  }
  EXPECT_DOUBLE_EQ(p.crop_transform.scale, 1.0);
}

TEST(CropRoi, DoubleSizeBoxHalvesWithoutCrop) {
  const RoiPatch p = CropRoi(Image::Filled(500, 500, 1, 0.25), {0, 0, 448, 448});
  EXPECT_DOUBLE_EQ(p.crop_transform.scale, 0.5);
  EXPECT_DOUBLE_EQ(p.crop_transform.to_original_x(224), 448.0);
  EXPECT_DOUBLE_EQ(p.pixels.at(100, 100), 0.25);
}

TEST(CropRoi, WideBoxCentreCropped) {
  std::mt19937_64 rng(6);
  const Image img = RandomImage(rng, 448, 224, 1);
  const RoiPatch p = CropRoi(img, {0, 0, 448, 224});
  EXPECT_DOUBLE_EQ(p.crop_transform.scale, 1.0);
  EXPECT_DOUBLE_EQ(p.crop_transform.origin_x, 112.0);
  EXPECT_DOUBLE_EQ(p.pixels.at(0, 0), img.at(112, 0));
  EXPECT_DOUBLE_EQ(p.pixels.at(223, 223), img.at(335, 223));
}

TEST(CropRoi, AlwaysRoiSized) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 350.0);
  const Image img = RandomImage(rng, 300, 200, 3);
  for (int i = 0; i < 100; ++i) {
    double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    const BBox b{x1, y1, x2, y2};
    const BBox c = Intersect(b, {0, 0, 300, 200});
    if (c.width() < 1 || c.height() < 1) continue;
    const RoiPatch p = CropRoi(img, b);
    EXPECT_EQ(p.pixels.width(), 224);
    EXPECT_EQ(p.pixels.height(), 224);
    EXPECT_EQ(p.pixels.channels(), 1);
  }
}

TEST(CropRoi, OutsideBoxRejected) {
  EXPECT_THROW(CropRoi(Image::Filled(10, 10, 1, 0.0), {20, 20, 30, 30}), InputError);
}

// Independent bilinear oracle with half-pixel centres.
double BilinearOracle(const std::vector<double>& p, int w, int h, int ow, int oh, int x, int y) {
  const double sx = std::clamp((x + 0.5) * w / ow - 0.5, 0.0, w - 1.0);
  const double sy = std::clamp((y + 0.5) * h / oh - 0.5, 0.0, h - 1.0);
  const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - x0, fy = sy - y0;
  auto at = [&](int xx, int yy) { return p[static_cast<std::size_t>(yy) * w + xx]; };
  const double top = at(x0, y0) * (1 - fx) + at(x1, y0) * fx;
  const double bot = at(x0, y1) * (1 - fx) + at(x1, y1) * fx;
  return top * (1 - fy) + bot * fy;
}

TEST(ResizePlane, MatchesBilinearOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [w, h, ow, oh] : {std::array{2, 2, 4, 4}, std::array{5, 3, 11, 7},
                              std::array{16, 9, 4, 3}, std::array{8, 8, 224, 224}}) {
    std::vector<double> p(static_cast<std::size_t>(w) * h);
    for (double& v : p) v = u(rng);
    const auto out = ResizePlane(p, w, h, ow, oh);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        EXPECT_NEAR(out[static_cast<std::size_t>(y) * ow + x],
                    BilinearOracle(p, w, h, ow, oh, x, y), 1e-12);
      }
    }
  }
}

TEST(Colormap, ControlPoints) {
  using C = std::array<double, 3>;
  EXPECT_EQ(Colormap(0.0), (C{0, 0, 0.5}));
  EXPECT_EQ(Colormap(0.25), (C{0, 0.5, 1}));
  EXPECT_EQ(Colormap(0.5), (C{0, 1, 0.5}));
  EXPECT_EQ(Colormap(0.75), (C{1, 1, 0}));
  EXPECT_EQ(Colormap(1.0), (C{1, 0, 0}));
  const C mid = Colormap(0.125);
  EXPECT_DOUBLE_EQ(mid[1], 0.25);
  EXPECT_DOUBLE_EQ(mid[2], 0.75);
}

TEST(Overlay, ZeroAlphaReplicatesBase) {
  std::mt19937_64 rng(9);
  const Image img = RandomImage(rng, 6, 5, 1);
  const Heatmap map{6, 5, std::vector<double>(30, 0.7)};
  const Image out = RenderOverlay(img, map, 0.0);
  ASSERT_EQ(out.channels(), 3);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(out.at(x, y, c), img.at(x, y));
    }
  }
}

TEST(Overlay, FullAlphaConstantMapIsLowEndColour) {
  const Image out = RenderOverlay(Image::Filled(3, 3, 1, 0.8), {3, 3, std::vector<double>(9, 0.0)}, 1.0);
  EXPECT_DOUBLE_EQ(out.at(1, 1, 0), 0.0);
  EXPECT_DOUBLE_EQ(out.at(1, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(out.at(1, 1, 2), 0.5);
}

TEST(Overlay, HalfAlphaOverWhiteIsMidpoint) {
  const Image out = RenderOverlay(Image::Filled(1, 1, 1, 1.0), {1, 1, {1.0}}, 0.5);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 2), 0.5);
}

TEST(Overlay, StaysInRangeAndChecksDimensions) {
  std::mt19937_64 rng(10);
  const Image img = RandomImage(rng, 8, 8, 3);
  std::vector<double> m(64);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : m) v = u(rng);
  for (double alpha : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (double v : RenderOverlay(img, {8, 8, m}, alpha).pixels()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(RenderOverlay(img, {4, 4, std::vector<double>(16)}, 0.5), InputError);
}

TEST(Augment, HorizontalFlipReflectsBoxes) {
  const auto a = HorizontalFlip(Image::Filled(100, 10, 1, 0.0), std::vector<BBox>{{10, 0, 20, 5}});
  EXPECT_EQ(a.boxes[0], (BBox{80, 0, 90, 5}));
}

TEST(Augment, FlipAndHalfTurnAreInvolutions) {
  std::mt19937_64 rng(11);
  const Image img = RandomImage(rng, 13, 7, 1);
  const std::vector<BBox> boxes{{1, 2, 5, 6}, {0, 0, 13, 7}};
  const auto f = HorizontalFlip(img, boxes);
  const auto ff = HorizontalFlip(f.image, f.boxes);
  EXPECT_EQ(ff.image, img);
  EXPECT_EQ(ff.boxes, boxes);
  const auto r = Rotate(img, boxes, 180);
  const auto rr = Rotate(r.image, r.boxes, 180);
  EXPECT_EQ(rr.image, img);
  EXPECT_EQ(rr.boxes, boxes);
}

TEST(Augment, QuarterTurnsComposeAndPreservePixels) {
  std::mt19937_64 rng(12);
  const Image img = RandomImage(rng, 9, 5, 1);
  const std::vector<BBox> boxes{{1, 1, 4, 3}};
  const auto r90 = Rotate(img, boxes, 90);
  EXPECT_EQ(r90.image.width(), 5);
  EXPECT_EQ(r90.image.height(), 9);
  // Clockwise: the top-left pixel lands in the top-right corner.
  EXPECT_EQ(r90.image.at(4, 0), img.at(0, 0));
  EXPECT_EQ(r90.boxes[0], (BBox{2, 1, 4, 4}));
  const auto back = Rotate(r90.image, r90.boxes, 270);
  EXPECT_EQ(back.image, img);
  EXPECT_EQ(back.boxes, boxes);
  EXPECT_EQ(Sorted(r90.image.pixels()), Sorted(img.pixels()));
  EXPECT_THROW(Rotate(img, boxes, 45), InputError);
}

TEST(Augment, MosaicIsSeededAndKeepsBoxesInside) {
  std::mt19937_64 rng(13);
  std::array<Image, 4> imgs;
  std::array<std::vector<BBox>, 4> boxes;
  for (int i = 0; i < 4; ++i) {
    imgs[i] = RandomImage(rng, 40, 30, 1);
    boxes[i] = {{2, 2, 38, 28}, {30, 20, 39, 29}, {0, 0, 5, 5}};
  }
  const MosaicResult a = Mosaic(imgs, boxes, 99);
  const MosaicResult b = Mosaic(imgs, boxes, 99);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.split_x, b.split_x);
  EXPECT_EQ(a.image.width(), 80);
  EXPECT_EQ(a.image.height(), 60);
  for (const MosaicBox& m : a.boxes) {
    EXPECT_TRUE(m.box.valid());
    EXPECT_GE(m.box.x1, 0);
    EXPECT_GE(m.box.y1, 0);
    EXPECT_LE(m.box.x2, 80);
    EXPECT_LE(m.box.y2, 60);
    const BBox& src = boxes[m.tile][m.index];
    EXPECT_GE(m.box.area(), kMosaicMinRetention * src.area() - 1e-9);
  }
  bool differs = false;
  for (std::uint64_t s = 0; s < 20 && !differs; ++s) {
    differs = Mosaic(imgs, boxes, s).split_x != a.split_x;
  }
  EXPECT_TRUE(differs);
  std::array<Image, 4> mixed = imgs;
  mixed[3] = RandomImage(rng, 41, 30, 1);
  EXPECT_THROW(Mosaic(mixed, boxes, 1), InputError);
}

TEST(PngIo, EightAndSixteenBitRoundTrip) {
  TempDir dir;
  std::vector<double> px;
  for (int i = 0; i < 12; ++i) px.push_back(i * 20 / 255.0);
  const Image gray(4, 3, 1, px);
  WritePng(dir / "g8.png", gray, 8);
  EXPECT_EQ(ReadPng(dir / "g8.png"), gray);

  std::vector<double> rgb;
  for (int i = 0; i < 12; ++i) rgb.push_back(i * 5000 / 65535.0);
  const Image colour(2, 2, 3, rgb);
  WritePng(dir / "c16.png", colour, 16);
  EXPECT_EQ(ReadPng(dir / "c16.png"), colour);

  const Heatmap h{2, 1, {0.0, 0.5}};
  WriteHeatmapPng(dir / "h.png", h);
  const Heatmap back = ReadHeatmapPng(dir / "h.png");
  EXPECT_EQ(back.width, 2);
  EXPECT_NEAR(back.values[1], 0.5, 0.5 / 65535.0);
}

TEST(PngIo, BadFilesAreInputErrors) {
  TempDir dir;
  EXPECT_THROW(ReadPng(dir / "missing.png"), InputError);
  testing::WriteFile(dir / "junk.png", "not a png at all");
  EXPECT_THROW(ReadPng(dir / "junk.png"), InputError);
}

}  // namespace
}  // namespace molarcam
