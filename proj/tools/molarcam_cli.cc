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

// molarcam: command-line front end for the two-stage radiograph engine.
//
// Every subcommand prints JSON on stdout (or writes it with --out). Exit
// codes: 0 ok, 1 input error, 2 model error, 3 internal invariant violation.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <CLI11.hpp>

#include "molarcam/classification.h"
#include "molarcam/dataset.h"
#include "molarcam/detection.h"
#include "molarcam/errors.h"
#include "molarcam/explainability.h"
#include "molarcam/imaging.h"
#include "molarcam/kernels/kernels.h"
#include "molarcam/metrics.h"
#include "molarcam/model.h"
#include "molarcam/pipeline.h"
#include "molarcam/png_io.h"
#include "molarcam/reference_nets.h"
#include "molarcam/report_json.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace molarcam;

namespace {

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void Emit(const json& doc, const std::string& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw InputError("cannot write " + out);
  f << text;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
}

// A file given to classify/explain is treated as an ROI. Anything that is not
// already 224x224 goes through the regular crop so the classifier contract
// holds.
RoiPatch LoadRoi(const fs::path& path) {
  const Image img = ToGrayscale(ReadPng(path));
  const BBox whole{0.0, 0.0, static_cast<double>(img.width()),
                   static_cast<double>(img.height())};
  if (img.width() == kRoiSize && img.height() == kRoiSize) {
    return RoiPatch{img, whole, CropTransform{}};
  }
  return CropRoi(img, whole);
}

ExplainTarget RequireTarget(const std::string& s) {
  const auto t = ParseExplainTarget(s);
  if (!t) throw InputError("--class must be predicted, pericoronitis or normal");
  return *t;
}

struct ThresholdFlags {
  double conf = kDefaultConfThreshold;
  double iou = kDefaultNmsIou;
  double threshold = kDefaultClsThreshold;
  double alpha = 0.5;
  std::string explain_class = "predicted";
  std::uint64_t seed = 0;

  void Attach(CLI::App* app) {
    app->add_option("--conf", conf, "detector confidence threshold")->capture_default_str();
    app->add_option("--iou", iou, "NMS IoU threshold")->capture_default_str();
    app->add_option("--threshold", threshold, "pericoronitis decision threshold")
        ->capture_default_str();
    app->add_option("--alpha", alpha, "overlay blend weight")->capture_default_str();
    app->add_option("--class", explain_class, "class to explain")->capture_default_str();
    app->add_option("--seed", seed, "run seed (echoed in the report)")->capture_default_str();
  }

  PipelineConfig Config() const {
    PipelineConfig c;
    c.conf_threshold = conf;
    c.nms_iou = iou;
    c.cls_threshold = threshold;
    c.overlay_alpha = alpha;
    c.explain_class = RequireTarget(explain_class);
    c.seed = seed;
    c.Validate();
    return c;
  }
};

// --- eval helpers -----------------------------------------------------------

struct ImagePredictions {
  std::string image;
  std::vector<Detection> detections;
};

// Accepts pipeline/batch reports, a detect report, or
// {"predictions":[{"image":..,"detections":[..]}]}.
std::vector<ImagePredictions> DetectionPredictions(const json& doc) {
  std::vector<ImagePredictions> out;
  auto add = [&](const json& item) {
    ImagePredictions p;
    p.image = item.at("image").get<std::string>();
    for (const json& d : item.at("detections")) p.detections.push_back(DetectionFromJson(d));
    out.push_back(std::move(p));
  };
  try {
    if (doc.contains("cases")) {
      for (const json& c : doc["cases"]) add(c);
    } else if (doc.contains("predictions")) {
      for (const json& c : doc["predictions"]) add(c);
    } else {
      add(doc);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed predictions: ") + e.what());
  }
  return out;
}

struct ImageScore {
  std::string image;
  double p_pericoronitis = 0.0;
  std::optional<CaseLabel> label;
};

// Accepts pipeline/batch reports (scored per case) or
// {"predictions":[{"image":..,"p_pericoronitis":..,"label":..}]}.
std::vector<ImageScore> ClassificationPredictions(const json& doc, double threshold) {
  std::vector<ImageScore> out;
  if (doc.contains("predictions")) {
    try {
      for (const json& p : doc["predictions"]) {
        ImageScore s;
        s.image = p.at("image").get<std::string>();
        s.p_pericoronitis = p.at("p_pericoronitis").get<double>();
        if (!(s.p_pericoronitis >= 0.0 && s.p_pericoronitis <= 1.0)) {
          throw InputError("p_pericoronitis out of [0,1] for '" + s.image + "'");
        }
        if (p.contains("label") && !p["label"].is_null()) {
          const std::string l = p["label"].get<std::string>();
          s.label = ParseLabel(l);
          if (!s.label) throw InputError("unknown label '" + l + "'");
        }
        out.push_back(std::move(s));
      }
    } catch (const json::exception& e) {
      throw InputError(std::string("malformed predictions: ") + e.what());
    }
    for (auto& s : out) {
      if (!s.label) s.label = Decide({1.0 - s.p_pericoronitis, s.p_pericoronitis}, threshold);
    }
    return out;
  }
  for (const CaseReport& r : CaseReportsFromJson(doc)) {
    const CaseScore cs = ScoreCase(r);
    out.push_back({r.image, cs.p_pericoronitis, cs.label});
  }
  return out;
}

std::map<std::string, const ManifestEntry*> IndexManifest(const Manifest& m) {
  std::map<std::string, const ManifestEntry*> by_image;
  for (const auto& e : m.entries) {
    if (!by_image.emplace(e.image, &e).second) {
      throw InputError("duplicate image '" + e.image + "' in ground truth");
    }
  }
  return by_image;
}

const ManifestEntry& Lookup(const std::map<std::string, const ManifestEntry*>& index,
                            const std::string& image) {
  auto it = index.find(image);
  if (it == index.end()) throw InputError("no ground truth for image '" + image + "'");
  return *it->second;
}

// --- augmentation -------------------------------------------------------------

Quadrant MirrorQuadrant(Quadrant q) {
  switch (q) {
    case Quadrant::kUR: return Quadrant::kUL;
    case Quadrant::kUL: return Quadrant::kUR;
    case Quadrant::kLL: return Quadrant::kLR;
    case Quadrant::kLR: return Quadrant::kLL;
  }
  return q;
}

std::vector<BBox> Boxes(const ManifestEntry& e) {
  std::vector<BBox> out;
  for (const auto& d : e.detections) out.push_back(d.box);
  return out;
}

Image ResizeTo(const Image& img, int w, int h) {
  if (img.width() == w && img.height() == h) return img;
  const int c = img.channels();
  std::vector<double> out(static_cast<std::size_t>(w) * h * c);
  std::vector<double> plane(static_cast<std::size_t>(img.width()) * img.height());
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = img.pixels()[i * c + ch];
    const auto resized = ResizePlane(plane, img.width(), img.height(), w, h);
    for (std::size_t i = 0; i < resized.size(); ++i) {
      out[i * c + ch] = std::clamp(resized[i], 0.0, 1.0);
    }
  }
  return Image(w, h, c, std::move(out));
}

struct AugmentArgs {
  std::string manifest;
  std::string ops = "hflip,rotate90,mosaic";
  std::uint64_t seed = 0;
  std::string out_dir;
};

json RunAugment(const AugmentArgs& args) {
  const Manifest m = LoadManifest(args.manifest);
  std::vector<std::string> ops;
  {
    std::stringstream ss(args.ops);
    for (std::string op; std::getline(ss, op, ',');) {
      if (op.empty()) continue;
      if (op != "hflip" && op != "rotate90" && op != "rotate180" && op != "rotate270" &&
          op != "mosaic") {
        throw InputError("unsupported augmentation '" + op + "'");
      }
      ops.push_back(op);
    }
  }
  const fs::path out_dir(args.out_dir);
  EnsureDir(out_dir);

  std::vector<ManifestEntry> produced;
  std::vector<std::string> warnings = m.warnings;
  auto save = [&](const Image& img, const std::string& name, ManifestEntry entry) {
    entry.image = name;
    entry.image_path = out_dir / name;
    entry.split.reset();
    WritePng(entry.image_path, img);
    produced.push_back(std::move(entry));
  };

  std::vector<Image> images;
  images.reserve(m.entries.size());
  for (const auto& e : m.entries) images.push_back(ReadPng(e.image_path));

  for (const std::string& op : ops) {
    if (op == "mosaic") {
      if (m.entries.size() < 4) {
        warnings.push_back("mosaic needs at least 4 images; skipped");
        continue;
      }
      for (std::size_t g = 0; g + 4 <= m.entries.size(); g += 4) {
        const int w = images[g].width();
        const int h = images[g].height();
        std::array<Image, 4> tiles;
        std::array<std::vector<BBox>, 4> boxes;
        for (int t = 0; t < 4; ++t) {
          const Image& src = images[g + t];
          tiles[t] = ResizeTo(src, w, h);
          const double sx = static_cast<double>(w) / src.width();
          const double sy = static_cast<double>(h) / src.height();
          for (const BBox& b : Boxes(m.entries[g + t])) {
            boxes[t].push_back({b.x1 * sx, b.y1 * sy, b.x2 * sx, b.y2 * sy});
          }
        }
        // Each group gets its own stream so groups stay independent.
        const MosaicResult r = Mosaic(tiles, boxes, args.seed + g / 4);
        ManifestEntry entry;
        std::optional<CaseLabel> label = m.entries[g].label;
        for (int t = 1; t < 4; ++t) {
          if (m.entries[g + t].label != label) label.reset();
        }
        entry.label = label;
        for (const MosaicBox& mb : r.boxes) {
          GroundTruthDetection d = m.entries[g + mb.tile].detections[mb.index];
          d.box = mb.box;
          entry.detections.push_back(d);
        }
        char name[64];
        std::snprintf(name, sizeof(name), "mosaic_%04zu.png", g / 4);
        save(r.image, name, std::move(entry));
      }
      continue;
    }
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      const ManifestEntry& src = m.entries[i];
      const std::vector<BBox> boxes = Boxes(src);
      Augmented a = op == "hflip" ? HorizontalFlip(images[i], boxes)
                                  : Rotate(images[i], boxes, std::stoi(op.substr(6)));
      ManifestEntry entry = src;
      for (std::size_t k = 0; k < entry.detections.size(); ++k) {
        entry.detections[k].box = a.boxes[k];
        if (op == "hflip") entry.detections[k].quadrant = MirrorQuadrant(entry.detections[k].quadrant);
      }
      save(a.image, src.image_path.stem().string() + "_" + op + ".png", std::move(entry));
    }
  }
  const fs::path manifest_out = out_dir / "manifest.json";
  SaveManifest(produced, manifest_out);
  return {{"manifest", manifest_out.string()},
          {"images", produced.size()},
          {"warnings", warnings}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MolarCam: third-molar detection, pericoronitis classification and Grad-CAM"};
  app.require_subcommand(1);
  std::string backend = "auto";
  app.add_option("--kernels", backend, "kernel backend: auto, scalar or avx2")
      ->capture_default_str();

  // detect
  auto* detect = app.add_subcommand("detect", "detect third molars in a radiograph");
  std::string image, model, out;
  double conf = kDefaultConfThreshold, iou = kDefaultNmsIou;
  detect->add_option("--image", image)->required();
  detect->add_option("--model", model)->required();
  detect->add_option("--conf", conf)->capture_default_str();
  detect->add_option("--iou", iou)->capture_default_str();
  detect->add_option("--out", out, "write the report here instead of stdout");

  // classify
  auto* classify = app.add_subcommand("classify", "classify a 224x224 ROI");
  std::string roi;
  double threshold = kDefaultClsThreshold;
  classify->add_option("--roi", roi)->required();
  classify->add_option("--model", model)->required();
  classify->add_option("--threshold", threshold)->capture_default_str();

  // explain
  auto* explain = app.add_subcommand("explain", "Grad-CAM heatmap for an ROI");
  std::string explain_class = "predicted", out_prefix = "explain", mode = "auto";
  double alpha = 0.5;
  explain->add_option("--roi", roi)->required();
  explain->add_option("--model", model)->required();
  explain->add_option("--class", explain_class)->capture_default_str();
  explain->add_option("--alpha", alpha)->capture_default_str();
  explain->add_option("--threshold", threshold)->capture_default_str();
  explain->add_option("--out-prefix", out_prefix)->capture_default_str();
  explain->add_option("--mode", mode, "auto, analytic or finite-difference")
      ->capture_default_str();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run both stages on one radiograph");
  std::string detector, classifier, out_dir = ".";
  ThresholdFlags flags;
  pipeline->add_option("--image", image)->required();
  pipeline->add_option("--detector", detector)->required();
  pipeline->add_option("--classifier", classifier)->required();
  pipeline->add_option("--out-dir", out_dir)->capture_default_str();
  flags.Attach(pipeline);

  // batch
  auto* batch = app.add_subcommand("batch", "run both stages over a manifest");
  std::string manifest;
  int parallelism = 1;
  batch->add_option("--manifest", manifest)->required();
  batch->add_option("--detector", detector)->required();
  batch->add_option("--classifier", classifier)->required();
  batch->add_option("--out-dir", out_dir)->capture_default_str();
  batch->add_option("--parallelism", parallelism)->capture_default_str();
  flags.Attach(batch);

  // evaluation
  auto* eval_det = app.add_subcommand("eval-det", "detection metrics against a manifest");
  std::string preds, gts;
  eval_det->add_option("--preds", preds)->required();
  eval_det->add_option("--gts", gts)->required();
  auto* eval_cls = app.add_subcommand("eval-cls", "classification metrics against a manifest");
  eval_cls->add_option("--preds", preds)->required();
  eval_cls->add_option("--gts", gts)->required();
  eval_cls->add_option("--threshold", threshold, "used when predictions carry no label")
      ->capture_default_str();

  // dataset
  auto* split = app.add_subcommand("split", "stratified train/validation split");
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::string out_train, out_val;
  split->add_option("--manifest", manifest)->required();
  split->add_option("--ratio", ratio)->capture_default_str();
  split->add_option("--seed", seed)->capture_default_str();
  split->add_option("--out-train", out_train)->required();
  split->add_option("--out-val", out_val)->required();

  auto* agreement = app.add_subcommand("agreement", "reader agreement tally");
  std::string reviews;
  agreement->add_option("--reviews", reviews)->required();

  auto* augment = app.add_subcommand("augment", "write augmented copies of a manifest");
  AugmentArgs aug;
  augment->add_option("--manifest", aug.manifest)->required();
  augment->add_option("--ops", aug.ops)->capture_default_str();
  augment->add_option("--seed", aug.seed)->capture_default_str();
  augment->add_option("--out-dir", aug.out_dir)->required();

  auto* export_ref = app.add_subcommand("export-reference", "write a reference network");
  std::string kind;
  export_ref->add_option("--kind", kind, "detector_stub or classifier_stub")->required();
  export_ref->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (backend == "scalar" || backend == "avx2") {
      const auto b = backend == "scalar" ? kernels::Backend::kScalar : kernels::Backend::kAvx2;
      if (!kernels::Select(b)) throw InputError("kernel backend " + backend + " unavailable");
    } else if (backend != "auto") {
      throw InputError("--kernels must be auto, scalar or avx2");
    }

    if (*detect) {
      const GraphModel det = LoadModel(model, ModelKind::kDetector);
      const Image img = ReadPng(image);
      const auto found = DetectMolars(det, img, conf, iou);
      json dets = json::array();
      for (const auto& d : found) dets.push_back(ToJson(d));
      Emit({{"image", image},
            {"model", det.identifier()},
            {"conf_threshold", conf},
            {"nms_iou", iou},
            {"detections", dets}},
           out);
    } else if (*classify) {
      const GraphModel cls = LoadModel(model, ModelKind::kClassifier);
      Emit(ToJson(Classify(cls, LoadRoi(roi), threshold)), "");
    } else if (*explain) {
      const GraphModel cls = LoadModel(model, ModelKind::kClassifier);
      const RoiPatch patch = LoadRoi(roi);
      const Classification c = Classify(cls, patch, threshold);
      const ExplainTarget target = RequireTarget(explain_class);
      if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("--alpha must be in [0,1]");
      const CaseLabel explained = target == ExplainTarget::kPredicted      ? c.label
                                  : target == ExplainTarget::kPericoronitis ? CaseLabel::kPericoronitis
                                                                            : CaseLabel::kNormal;
      std::optional<GradientMode> gm;
      if (mode == "analytic") {
        gm = GradientMode::kAnalytic;
      } else if (mode == "finite-difference") {
        gm = GradientMode::kFiniteDifference;
      } else if (mode != "auto") {
        throw InputError("--mode must be auto, analytic or finite-difference");
      }
      const Explanation e = Explain(cls, patch, static_cast<int>(explained), gm);
      const std::string heatmap = out_prefix + "_heatmap.png";
      const std::string overlay = out_prefix + "_overlay.png";
      if (const fs::path parent = fs::path(out_prefix).parent_path(); !parent.empty()) {
        EnsureDir(parent);
      }
      WriteHeatmapPng(heatmap, e.heatmap);
      WritePng(overlay, RenderOverlay(patch.pixels, e.heatmap, alpha));
      Emit({{"classification", ToJson(c)},
            {"explained_class", LabelName(explained)},
            {"gradient_mode",
             e.mode == GradientMode::kAnalytic ? "analytic" : "finite-difference"},
            {"channel_weights", e.weights.alpha},
            {"heatmap", heatmap},
            {"overlay", overlay}},
           "");
    } else if (*pipeline) {
      const PipelineConfig config = flags.Config();
      const GraphModel det = LoadModel(detector, ModelKind::kDetector);
      const GraphModel cls = LoadModel(classifier, ModelKind::kClassifier);
      const Image img = ReadPng(image);
      EnsureDir(out_dir);
      const CaseReport r =
          RunCase(img, image, det, cls, config, out_dir, fs::path(image).stem().string());
      const json doc = ToJson(r);
      Emit(doc, (fs::path(out_dir) / "report.json").string());
      Emit(doc, "");
    } else if (*batch) {
      const PipelineConfig config = flags.Config();
      if (parallelism < 1) throw InputError("--parallelism must be >= 1");
      const Manifest m = LoadManifest(manifest);
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      const GraphModel det = LoadModel(detector, ModelKind::kDetector);
      const GraphModel cls = LoadModel(classifier, ModelKind::kClassifier);
      EnsureDir(out_dir);
      const BatchResult r = RunBatch(m.entries, det, cls, config, out_dir, parallelism);
      const json doc = ToJson(r);
      Emit(doc, (fs::path(out_dir) / "report.json").string());
      Emit(doc, "");
    } else if (*eval_det) {
      const Manifest m = LoadManifest(gts, /*check_images=*/false);
      const auto index = IndexManifest(m);
      const auto predictions = DetectionPredictions(ReadJson(preds));
      std::vector<ScoredBox> boxes;
      std::vector<GroundTruthBox> truth;
      // Ground truth for every manifest image counts, predicted or not.
      std::map<std::string, int> image_ids;
      for (const auto& e : m.entries) {
        const int id = static_cast<int>(image_ids.size());
        image_ids.emplace(e.image, id);
        for (const auto& g : e.detections) {
          truth.push_back({id, CompositeIndex(g.quadrant, g.angulation), g.box});
        }
      }
      for (const auto& p : predictions) {
        Lookup(index, p.image);
        for (const auto& d : p.detections) {
          boxes.push_back({image_ids.at(p.image), d.class_index(), d.box, d.confidence});
        }
      }
      EvaluationReport report;
      report.detection = MapRange(boxes, truth);
      Emit(ToJson(report), "");
    } else if (*eval_cls) {
      if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("--threshold must be in (0,1)");
      const Manifest m = LoadManifest(gts, /*check_images=*/false);
      const auto index = IndexManifest(m);
      std::vector<double> scores;
      std::vector<CaseLabel> predicted, truths;
      for (const auto& p : ClassificationPredictions(ReadJson(preds), threshold)) {
        const ManifestEntry& e = Lookup(index, p.image);
        if (!e.label) continue;
        scores.push_back(p.p_pericoronitis);
        predicted.push_back(*p.label);
        truths.push_back(*e.label);
      }
      if (truths.empty()) throw InputError("no labelled cases to evaluate");
      EvaluationReport report;
      report.classification = EvaluateClassification(scores, predicted, truths);
      Emit(ToJson(report), "");
    } else if (*split) {
      if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("--ratio must be in (0,1)");
      const Manifest m = LoadManifest(manifest);
      const SplitResult s = StratifiedSplit(m.entries, ratio, seed);
      std::vector<ManifestEntry> train, val;
      for (std::size_t i : s.train) train.push_back(m.entries[i]), train.back().split = "train";
      for (std::size_t i : s.val) val.push_back(m.entries[i]), val.back().split = "val";
      SaveManifest(train, out_train);
      SaveManifest(val, out_val);
      Emit({{"train", train.size()}, {"val", val.size()}, {"skipped", m.skipped}}, "");
    } else if (*agreement) {
      const auto r = LoadReviews(reviews);
      const auto yes = std::count_if(r.begin(), r.end(), [](const auto& x) { return x.agrees; });
      Emit({{"reviews", r.size()}, {"affirmative", yes}, {"agreement", AgreementTally(r)}}, "");
    } else if (*augment) {
      Emit(RunAugment(aug), "");
    } else if (*export_ref) {
      ReferenceKind rk;
      if (kind == "detector_stub") {
        rk = ReferenceKind::kDetectorStub;
      } else if (kind == "classifier_stub") {
        rk = ReferenceKind::kClassifierStub;
      } else {
        throw InputError("--kind must be detector_stub or classifier_stub");
      }
      SaveModel(ReferenceNet(rk), out);
      Emit({{"model", out}, {"sidecar", SidecarPath(out).string()}}, "");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
