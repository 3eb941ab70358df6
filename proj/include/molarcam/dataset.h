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

#ifndef MOLARCAM_DATASET_H_
#define MOLARCAM_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "molarcam/classification.h"
#include "molarcam/detection.h"
#include "molarcam/geometry.h"

namespace molarcam {

struct GroundTruthDetection {
  BBox box;
  Quadrant quadrant = Quadrant::kUR;
  Angulation angulation = Angulation::kVertical;
};

struct ManifestEntry {
  std::string image;                 // as written in the manifest
  std::filesystem::path image_path;  // resolved against the manifest folder
  std::vector<GroundTruthDetection> detections;
  std::optional<CaseLabel> label;
  std::optional<std::string> split;  // "train" or "val"
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Entries dropped because their image does not exist.
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Schema:
// {"entries":[{"image":"a.png",
//              "detections":[{"box":[x1,y1,x2,y2],"quadrant":"LL",
//                             "angulation":"vertical"}],
//              "label":"pericoronitis"|"normal"|null}]}
// An empty file is an empty manifest. Throws InputError on malformed JSON,
// invalid boxes or unknown vocabulary (naming the entry). Missing images
// are skipped with a warning when check_images is set.
Manifest ParseManifest(const nlohmann::json& doc,
                       const std::filesystem::path& base_dir,
                       bool check_images = true);
Manifest LoadManifest(const std::filesystem::path& path, bool check_images = true);

// Image paths are written relative to the output file's folder.
nlohmann::json ManifestToJson(std::span<const ManifestEntry> entries,
                              const std::filesystem::path& out_dir);
void SaveManifest(std::span<const ManifestEntry> entries,
                  const std::filesystem::path& path);

// Stratum of an entry: its label when present, otherwise the sorted
// composite classes of its detections.
std::string StratumKey(const ManifestEntry& entry);

struct SplitResult {
  std::vector<std::size_t> train;  // indices into the input, ascending
  std::vector<std::size_t> val;
};

// Within each stratum a seeded shuffle sends the first round-half-up(ratio*n)
// members to train (singleton strata always go to train).
SplitResult StratifiedSplit(std::span<const ManifestEntry> entries, double ratio,
                            std::uint64_t seed);

struct ReaderReview {
  std::string case_id;
  std::string overlay_path;
  bool agrees = false;
};

// {"reviews":[{"case":"id","agrees":true,"overlay":"optional.png"}]}.
// Case ids must be unique.
std::vector<ReaderReview> ParseReviews(const nlohmann::json& doc);
std::vector<ReaderReview> LoadReviews(const std::filesystem::path& path);

// Fraction of affirmative reviews. Throws InputError on an empty set.
double AgreementTally(std::span<const ReaderReview> reviews);

}  // namespace molarcam

#endif  // MOLARCAM_DATASET_H_
