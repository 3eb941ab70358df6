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

#include "molarcam/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "molarcam/errors.h"

namespace molarcam {
namespace {

using nlohmann::json;

std::string Describe(std::size_t index, const json& entry) {
  std::string where = "entry " + std::to_string(index);
  if (entry.is_object() && entry.contains("image") && entry["image"].is_string()) {
    where += " (" + entry["image"].get<std::string>() + ")";
  }
  return where;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json ParseJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadText(path);
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    return json::object();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

GroundTruthDetection ParseDetection(const json& d, const std::string& where) {
  if (!d.is_object()) throw InputError(where + ": detection must be an object");
  GroundTruthDetection out;
  const json& box = d.value("box", json());
  if (!box.is_array() || box.size() != 4 ||
      !std::all_of(box.begin(), box.end(), [](const json& v) { return v.is_number(); })) {
    throw InputError(where + ": box must be [x1,y1,x2,y2]");
  }
  out.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
             box[3].get<double>()};
  if (!out.box.valid()) throw InputError(where + ": box has non-positive extent");
  const std::string q = d.value("quadrant", std::string());
  const std::string a = d.value("angulation", std::string());
  const auto quadrant = ParseQuadrant(q);
  if (!quadrant) throw InputError(where + ": unknown quadrant '" + q + "'");
  const auto angulation = ParseAngulation(a);
  if (!angulation) throw InputError(where + ": unknown angulation '" + a + "'");
  out.quadrant = *quadrant;
  out.angulation = *angulation;
  return out;
}

}  // namespace

Manifest ParseManifest(const json& doc, const std::filesystem::path& base_dir,
                       bool check_images) {
  Manifest m;
  if (doc.is_object() && doc.empty()) return m;
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw InputError("manifest must be an object with an \"entries\" array");
  }
  const json& entries = doc["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    const std::string where = Describe(i, e);
    if (!e.is_object() || !e.contains("image") || !e["image"].is_string()) {
      throw InputError(where + ": missing \"image\" path");
    }
    ManifestEntry entry;
    entry.image = e["image"].get<std::string>();
    const std::filesystem::path p(entry.image);
    entry.image_path = p.is_absolute() ? p : base_dir / p;
    if (e.contains("detections") && !e["detections"].is_null()) {
      if (!e["detections"].is_array()) throw InputError(where + ": detections must be a list");
      for (const json& d : e["detections"]) entry.detections.push_back(ParseDetection(d, where));
    }
    if (e.contains("label") && !e["label"].is_null()) {
      const std::string s = e["label"].is_string() ? e["label"].get<std::string>() : e["label"].dump();
      const auto label = ParseLabel(s);
      if (!label) throw InputError(where + ": unknown label '" + s + "'");
      entry.label = label;
    }
    if (e.contains("split") && !e["split"].is_null()) {
      const std::string s = e["split"].is_string() ? e["split"].get<std::string>() : "";
      if (s != "train" && s != "val") throw InputError(where + ": split must be train or val");
      entry.split = s;
    }
    if (check_images && !std::filesystem::exists(entry.image_path)) {
      m.warnings.push_back(where + ": image not found, skipped");
      ++m.skipped;
      continue;
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

Manifest LoadManifest(const std::filesystem::path& path, bool check_images) {
  return ParseManifest(ParseJsonFile(path), path.parent_path(), check_images);
}

json ManifestToJson(std::span<const ManifestEntry> entries,
                    const std::filesystem::path& out_dir) {
  json list = json::array();
  for (const ManifestEntry& e : entries) {
    json j;
    std::filesystem::path img = e.image_path.empty() ? std::filesystem::path(e.image)
                                                     : e.image_path;
    if (!out_dir.empty() && img.is_relative() == out_dir.is_relative()) {
      img = img.lexically_normal().lexically_relative(out_dir.lexically_normal());
      if (img.empty()) img = e.image;
    }
    j["image"] = img.generic_string();
    json dets = json::array();
    for (const auto& d : e.detections) {
      dets.push_back({{"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}},
                      {"quadrant", QuadrantName(d.quadrant)},
                      {"angulation", AngulationName(d.angulation)}});
    }
    j["detections"] = std::move(dets);
    j["label"] = e.label ? json(LabelName(*e.label)) : json(nullptr);
    if (e.split) j["split"] = *e.split;
    list.push_back(std::move(j));
  }
  return json{{"entries", std::move(list)}};
}

void SaveManifest(std::span<const ManifestEntry> entries,
                  const std::filesystem::path& path) {
  const auto dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << ManifestToJson(entries, dir.empty() ? std::filesystem::path(".") : dir).dump(2)
      << "\n";
}

std::string StratumKey(const ManifestEntry& entry) {
  if (entry.label) return "label:" + std::string(LabelName(*entry.label));
  if (entry.detections.empty()) return "none";
  std::vector<int> classes;
  for (const auto& d : entry.detections) {
    classes.push_back(CompositeIndex(d.quadrant, d.angulation));
  }
  std::sort(classes.begin(), classes.end());
  std::string key = "det:";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) key += ",";
    key += std::to_string(classes[i]);
  }
  return key;
}

SplitResult StratifiedSplit(std::span<const ManifestEntry> entries, double ratio,
                            std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw InputError("split ratio must be in [0,1]");
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    strata[StratumKey(entries[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> to_train(entries.size(), false);
  for (auto& [key, members] : strata) {
    // Fisher-Yates with the raw engine output keeps the order independent of
    // the standard library's distribution implementations.
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(members[i - 1], members[j]);
    }
    const std::size_t n = members.size();
    std::size_t n_train = static_cast<std::size_t>(std::floor(ratio * n + 0.5));
    if (n == 1) n_train = 1;
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }
  SplitResult out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (to_train[i] ? out.train : out.val).push_back(i);
  }
  return out;
}

std::vector<ReaderReview> ParseReviews(const json& doc) {
  if (!doc.is_object() || !doc.contains("reviews") || !doc["reviews"].is_array()) {
    throw InputError("review file must be an object with a \"reviews\" array");
  }
  std::vector<ReaderReview> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["reviews"].size(); ++i) {
    const json& r = doc["reviews"][i];
    if (!r.is_object() || !r.contains("case") || !r.contains("agrees") ||
        !r["agrees"].is_boolean()) {
      throw InputError("review " + std::to_string(i) + ": needs \"case\" and boolean \"agrees\"");
    }
    ReaderReview review;
    review.case_id = r["case"].is_string() ? r["case"].get<std::string>() : r["case"].dump();
    review.agrees = r["agrees"].get<bool>();
    review.overlay_path = r.value("overlay", std::string());
    if (!seen.insert(review.case_id).second) {
      throw InputError("duplicate review for case '" + review.case_id + "'");
    }
    out.push_back(std::move(review));
  }
  return out;
}

std::vector<ReaderReview> LoadReviews(const std::filesystem::path& path) {
  return ParseReviews(ParseJsonFile(path));
}

double AgreementTally(std::span<const ReaderReview> reviews) {
  if (reviews.empty()) throw InputError("agreement tally needs at least one review");
  const auto agree = std::count_if(reviews.begin(), reviews.end(),
                                   [](const ReaderReview& r) { return r.agrees; });
  return static_cast<double>(agree) / static_cast<double>(reviews.size());
}

}  // namespace molarcam
