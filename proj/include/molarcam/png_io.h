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
#ifndef MOLARCAM_PNG_IO_H_
#define MOLARCAM_PNG_IO_H_

#include <filesystem>

#include "molarcam/image.h"

namespace molarcam {

// Reads 8/16-bit grayscale or RGB PNGs, normalizing by 255 or 65535. Alpha
// is dropped; palette and sub-byte grayscale images are expanded to 8 bits.
Image ReadPng(const std::filesystem::path& path);

// Writes 1- or 3-channel images; bit_depth is 8 or 16. Values are stored as
// round(v * (2^depth - 1)).
void WritePng(const std::filesystem::path& path, const Image& img,
              int bit_depth = 8);

// Heatmaps persist as 16-bit grayscale, value = round(v * 65535).
void WriteHeatmapPng(const std::filesystem::path& path, const Heatmap& map);
Heatmap ReadHeatmapPng(const std::filesystem::path& path);

}  // namespace molarcam

#endif  // MOLARCAM_PNG_IO_H_
