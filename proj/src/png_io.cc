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
#include "molarcam/png_io.h"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "molarcam/errors.h"

namespace molarcam {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void PngErrorHandler(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void PngWarningHandler(png_structp, png_const_charp) {}

FilePtr Open(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError("cannot open " + path.string());
  return f;
}

}  // namespace

Image ReadPng(const std::filesystem::path& path) {
  FilePtr file = Open(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw InputError(path.string() + " is not a PNG file");
  }

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           PngErrorHandler, PngWarningHandler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("libpng initialisation failed");
  }

  int width = 0, height = 0, channels = 0, depth = 0;
  std::vector<png_byte> raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("failed to decode " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = raw.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    throw InputError(path.string() + ": unsupported channel layout");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  std::vector<double> px(n);
  if (depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t v = 0;
      std::memcpy(&v, raw.data() + 2 * i, 2);
      px[i] = v / 65535.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) px[i] = raw[i] / 255.0;
  }
  return Image(width, height, channels, std::move(px));
}

void WritePng(const std::filesystem::path& path, const Image& img,
              int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InputError("png bit depth must be 8 or 16");
  }
  if (img.empty()) throw InputError("cannot write an empty image");
  FilePtr file = Open(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            PngErrorHandler, PngWarningHandler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InputError("libpng initialisation failed");
  }

  const int w = img.width(), h = img.height(), c = img.channels();
  const int bytes = bit_depth / 8;
  const double max_value = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t rowbytes = static_cast<std::size_t>(w) * c * bytes;
  std::vector<png_byte> raw(rowbytes * h);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto v = static_cast<std::uint32_t>(std::lround(px[i] * max_value));
    if (bytes == 2) {
      raw[2 * i] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
      raw[2 * i + 1] = static_cast<png_byte>(v & 0xff);
    } else {
      raw[i] = static_cast<png_byte>(v);
    }
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = raw.data() + rowbytes * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("failed to encode " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, w, h, bit_depth,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void WriteHeatmapPng(const std::filesystem::path& path, const Heatmap& map) {
  WritePng(path, Image(map.width, map.height, 1, map.values), 16);
}

Heatmap ReadHeatmapPng(const std::filesystem::path& path) {
  Image img = ReadPng(path);
  if (img.channels() != 1) {
    throw InputError(path.string() + ": heatmap must be single-channel");
  }
  const int w = img.width(), h = img.height();
  return {w, h, std::move(img).release()};
}

}  // namespace molarcam
