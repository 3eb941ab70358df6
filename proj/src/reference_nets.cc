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

#include "molarcam/reference_nets.h"

namespace molarcam {
namespace {

using Ints = std::vector<std::int64_t>;

Tensor Draw(LcgWeights& lcg, Shape shape, double gain = 1.0,
            double offset = 0.0) {
  std::vector<double> data(static_cast<std::size_t>(NumElements(shape)));
  for (double& v : data) v = gain * lcg.Next() + offset;
  return Tensor(std::move(shape), std::move(data));
}

Node MakeNode(std::string op, std::vector<std::string> inputs,
              std::string output, std::map<std::string, AttrValue> attrs = {}) {
  Node n;
  n.name = output;
  n.op_type = std::move(op);
  n.inputs = std::move(inputs);
  n.outputs = {std::move(output)};
  n.attrs = std::move(attrs);
  return n;
}

GraphModel ClassifierStub() {
  LcgWeights lcg;
  Graph g;
  g.name = "classifier_stub";
  g.input = {"input", {1, 1, 224, 224}};
  g.outputs = {"logits"};
  g.initializers["conv1.weight"] = Draw(lcg, {4, 1, 3, 3});
  g.initializers["conv2.weight"] = Draw(lcg, {8, 4, 3, 3});
  g.initializers["fc.weight"] = Draw(lcg, {2, 8});
  g.initializers["fc.bias"] = Draw(lcg, {2});

  const Ints pad1{1, 1, 1, 1};
  g.nodes.push_back(MakeNode("AveragePool", {"input"}, "stem",
                             {{"kernel_shape", Ints{14, 14}},
                              {"strides", Ints{14, 14}}}));
  g.nodes.push_back(MakeNode("Conv", {"stem", "conv1.weight"}, "conv1",
                             {{"kernel_shape", Ints{3, 3}}, {"pads", pad1}}));
  g.nodes.push_back(MakeNode("Relu", {"conv1"}, "relu1"));
  g.nodes.push_back(MakeNode("MaxPool", {"relu1"}, "pool1",
                             {{"kernel_shape", Ints{2, 2}}, {"strides", Ints{2, 2}}}));
  g.nodes.push_back(MakeNode("Conv", {"pool1", "conv2.weight"}, "conv2",
                             {{"kernel_shape", Ints{3, 3}}, {"pads", pad1}}));
  g.nodes.push_back(MakeNode("Relu", {"conv2"}, std::string(kLastConvTap)));
  g.nodes.push_back(MakeNode("GlobalAveragePool", {std::string(kLastConvTap)}, "gap"));
  g.nodes.push_back(MakeNode("Flatten", {"gap"}, "flat", {{"axis", std::int64_t{1}}}));
  g.nodes.push_back(MakeNode("Gemm", {"flat", "fc.weight", "fc.bias"}, "logits",
                             {{"transB", std::int64_t{1}}}));

  ModelMetadata meta{ModelKind::kClassifier, HeadKind::kGapLinear, "fc.weight"};
  return GraphModel(std::move(g), meta, "reference:classifier_stub");
}

GraphModel DetectorStub() {
  constexpr std::int64_t kStride = 32;
  constexpr std::int64_t kGrid = 832 / kStride;
  constexpr double kBoxSide = 64.0;

  LcgWeights lcg;
  Graph g;
  g.name = "detector_stub";
  g.input = {"input", {1, 1, 832, 832}};
  g.outputs = {"detections"};
  // Bright cells (max > ~0.65) score above 0.25; the 0.447 letterbox border
  // and dark backgrounds stay far below it.
  g.initializers["cls.weight"] = Draw(lcg, {16, 1, 1, 1}, 1.0, 20.0);
  g.initializers["cls.bias"] = Draw(lcg, {16}, 1.0, -14.0);
  g.initializers["box.weight"] = Draw(lcg, {4, 1, 1, 1});
  g.initializers["box.bias"] = Draw(lcg, {4});

  Tensor anchors = Tensor::Zeros({1, 4, kGrid, kGrid});
  const std::int64_t plane = kGrid * kGrid;
  for (std::int64_t i = 0; i < kGrid; ++i) {
    for (std::int64_t j = 0; j < kGrid; ++j) {
      const std::int64_t cell = i * kGrid + j;
      anchors.data[cell] = static_cast<double>(j * kStride + kStride / 2);
      anchors.data[plane + cell] = static_cast<double>(i * kStride + kStride / 2);
      anchors.data[2 * plane + cell] = kBoxSide;
      anchors.data[3 * plane + cell] = kBoxSide;
    }
  }
  g.initializers["anchors"] = std::move(anchors);

  // Position prior: a class keeps its logit only in the film region of its
  // quadrant (patient's right on the image's left), so the stub's quadrant
  // labels follow where a bright region sits.
  Tensor prior = Tensor::Zeros({1, 16, kGrid, kGrid});
  for (int cls = 0; cls < 16; ++cls) {
    const int q = cls / 4;  // UR, UL, LL, LR
    const bool upper = q < 2;
    const bool image_left = q == 0 || q == 3;
    for (std::int64_t i = 0; i < kGrid; ++i) {
      for (std::int64_t j = 0; j < kGrid; ++j) {
        const bool in_region = (i < kGrid / 2) == upper && (j < kGrid / 2) == image_left;
        prior.data[cls * plane + i * kGrid + j] = in_region ? 0.0 : -8.0;
      }
    }
  }
  g.initializers["quadrant_prior"] = std::move(prior);
  g.initializers["out_shape"] =
      Tensor({3}, {1.0, 20.0, double(plane)}, DataType::kInt64);

  g.nodes.push_back(MakeNode("MaxPool", {"input"}, "grid_features",
                             {{"kernel_shape", Ints{kStride, kStride}},
                              {"strides", Ints{kStride, kStride}}}));
  g.nodes.push_back(MakeNode("Conv", {"grid_features", "cls.weight", "cls.bias"},
                             "cls_logits", {{"kernel_shape", Ints{1, 1}}}));
  g.nodes.push_back(MakeNode("Add", {"cls_logits", "quadrant_prior"}, "cls_placed"));
  g.nodes.push_back(MakeNode("Sigmoid", {"cls_placed"}, "cls_scores"));
  g.nodes.push_back(MakeNode("Conv", {"grid_features", "box.weight", "box.bias"},
                             "box_offsets", {{"kernel_shape", Ints{1, 1}}}));
  g.nodes.push_back(MakeNode("Add", {"box_offsets", "anchors"}, "boxes"));
  g.nodes.push_back(MakeNode("Concat", {"boxes", "cls_scores"}, "grid",
                             {{"axis", std::int64_t{1}}}));
  g.nodes.push_back(MakeNode("Reshape", {"grid", "out_shape"}, "detections"));

  ModelMetadata meta{ModelKind::kDetector, HeadKind::kOpaque, std::nullopt};
  return GraphModel(std::move(g), meta, "reference:detector_stub");
}

}  // namespace

GraphModel ReferenceNet(ReferenceKind kind) {
  return kind == ReferenceKind::kClassifierStub ? ClassifierStub() : DetectorStub();
}

}  // namespace molarcam
