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

#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "molarcam/errors.h"
#include "molarcam/model.h"
#include "molarcam/reference_nets.h"
#include "stub_oracle.h"
#include "test_util.h"

namespace molarcam {
namespace {

using testing::ClassifierStubOracle;
using testing::TempDir;

Tensor Standardized(const std::vector<double>& pixels) {
  std::vector<double> v(pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (pixels[i] - 0.5) / 0.5;
  return Tensor({1, 1, 224, 224}, std::move(v));
}

TEST(Lcg, FirstValuesFollowTheRecurrence) {
  LcgWeights lcg;
  const std::uint64_t x1 = (1103515245ULL * 42 + 12345) % (1ULL << 31);
  EXPECT_EQ(lcg.NextRaw(), x1);
  LcgWeights again;
  EXPECT_DOUBLE_EQ(again.Next(), (static_cast<double>(x1) / 2147483648.0 - 0.5) / 5.0);
}

TEST(ReferenceNet, ConstructionIsDeterministic) {
  const GraphModel a = ReferenceNet(ReferenceKind::kClassifierStub);
  const GraphModel b = ReferenceNet(ReferenceKind::kClassifierStub);
  EXPECT_EQ(a.graph().initializers, b.graph().initializers);
  EXPECT_EQ(a.output_shapes().front(), (Shape{1, 2}));
  EXPECT_EQ(a.tap_shape(kLastConvTap), (Shape{1, 8, 8, 8}));
  ASSERT_TRUE(a.gap_linear().has_value());
  EXPECT_EQ(a.gap_linear()->channels, 8);
}

TEST(ReferenceNet, ZeroInputGivesBias) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const auto out = Forward(m, Tensor::Zeros({1, 1, 224, 224}));
  const ClassifierStubOracle oracle;
  EXPECT_EQ(out[0].data[0], oracle.bias(0));
  EXPECT_EQ(out[0].data[1], oracle.bias(1));
}

TEST(ReferenceNet, ForwardMatchesStraightLineOracle) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const auto patch = testing::TestPatch();
  const Tensor x = Standardized(patch);
  ClassifierStubOracle oracle;
  oracle.Forward(x.data);
  const std::string tap(kLastConvTap);
  const ForwardResult r = ForwardWithTaps(m, x, std::span(&tap, 1));
  EXPECT_NEAR(r.outputs[0].data[0], oracle.logits()[0], 1e-12);
  EXPECT_NEAR(r.outputs[0].data[1], oracle.logits()[1], 1e-12);
  const auto a = oracle.last_conv();
  const Tensor& captured = r.activations.at(tap);
  ASSERT_EQ(captured.size(), a.size());
  int active = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(captured.data[i], a[i], 1e-12);
    active += a[i] > 0;
  }
  EXPECT_GT(active, 0) << "test patch should activate last_conv";
}

TEST(ReferenceNet, InputGradientMatchesCentralDifferences) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const Tensor x = Standardized(testing::TestPatch());
  ClassifierStubOracle oracle;
  oracle.Forward(x.data);
  const auto grad = oracle.InputGradient(0);
  const double h = 1e-4;
  // Three probe pixels: inside the bright blob, on the ramp, near a corner.
  for (int idx : {80 * 224 + 150, 120 * 224 + 40, 3 * 224 + 220}) {
    Tensor up = x, down = x;
    up.data[idx] += h;
    down.data[idx] -= h;
    const double fd = (Forward(m, up)[0].data[0] - Forward(m, down)[0].data[0]) / (2 * h);
    EXPECT_NEAR(fd, grad[idx], 1e-8 + 1e-5 * std::abs(grad[idx])) << "pixel " << idx;
  }
}

TEST(Forward, TapsAreConsistent) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const Tensor x = Standardized(testing::TestPatch());
  const auto plain = Forward(m, x);
  const auto taps = m.taps();
  ASSERT_FALSE(taps.empty());
  const ForwardResult all = ForwardWithTaps(m, x, taps);
  EXPECT_EQ(all.outputs, plain);
  for (const std::string& t : taps) {
    EXPECT_EQ(ForwardFromTap(m, t, all.activations.at(t)), plain) << t;
  }
  EXPECT_EQ(Forward(m, x), plain);
}

TEST(Forward, ZeroTapThroughHeadGivesBias) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const auto out = ForwardFromTap(m, kLastConvTap, Tensor::Zeros({1, 8, 8, 8}));
  EXPECT_EQ(out[0].data[0], m.gap_linear()->bias[0]);
  EXPECT_EQ(out[0].data[1], m.gap_linear()->bias[1]);
}

TEST(Forward, RejectsUnknownTapsAndBadShapes) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  EXPECT_THROW(ForwardFromTap(m, "nope", Tensor::Zeros({1, 8, 8, 8})), ModelError);
  EXPECT_THROW(ForwardFromTap(m, kLastConvTap, Tensor::Zeros({1, 8, 4, 4})), ModelError);
  EXPECT_THROW(Forward(m, Tensor::Zeros({1, 1, 100, 100})), ModelError);
}

TEST(Forward, ThreeChannelModelsReplicateGrayInput) {
  Graph g = ReferenceNet(ReferenceKind::kClassifierStub).graph();
  g.input.shape = {1, 3, 224, 224};
  auto& w = g.initializers.at("conv1.weight");
  // Split conv1 evenly over three identical channels.
  std::vector<double> w3;
  for (int o = 0; o < 4; ++o) {
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 9; ++k) w3.push_back(w.data[o * 9 + k] / 3.0);
    }
  }
  w = Tensor({4, 3, 3, 3}, w3);
  const GraphModel rgb(g, ReferenceNet(ReferenceKind::kClassifierStub).metadata(), "rgb");
  const GraphModel gray = ReferenceNet(ReferenceKind::kClassifierStub);
  const Tensor x = Standardized(testing::TestPatch());
  EXPECT_NEAR(Forward(rgb, x)[0].data[0], Forward(gray, x)[0].data[0], 1e-12);
}

TEST(Forward, ConcurrentCallsAgree) {
  const GraphModel m = ReferenceNet(ReferenceKind::kClassifierStub);
  const Tensor x = Standardized(testing::TestPatch());
  const auto expected = Forward(m, x);
  std::vector<std::vector<Tensor>> results(4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { results[t] = Forward(m, x); });
  for (auto& th : pool) th.join();
  for (const auto& r : results) EXPECT_EQ(r, expected);
}

TEST(DetectorStub, BlankImageIsSilentAndBrightPatchFires) {
  const GraphModel m = ReferenceNet(ReferenceKind::kDetectorStub);
  EXPECT_EQ(m.output_shapes().front(), (Shape{1, 20, 676}));
  auto max_score = [&](const Tensor& x) {
    const Tensor out = Forward(m, x)[0];
    double best = 0.0;
    for (std::size_t i = 4 * 676; i < out.size(); ++i) best = std::max(best, out.data[i]);
    return best;
  };
  EXPECT_LT(max_score(Tensor::Zeros({1, 1, 832, 832})), 0.25);
  EXPECT_LT(max_score(Tensor({1, 1, 832, 832}, std::vector<double>(832 * 832, 0.447))), 0.25);
  Tensor bright = Tensor::Zeros({1, 1, 832, 832});
  for (int y = 100; y < 200; ++y) {
    for (int x = 300; x < 400; ++x) bright.data[y * 832 + x] = 0.95;
  }
  EXPECT_GT(max_score(bright), 0.5);
}

TEST(OnnxFormat, SerializeParseRoundTrip) {
  for (ReferenceKind k : {ReferenceKind::kClassifierStub, ReferenceKind::kDetectorStub}) {
    const GraphModel model = ReferenceNet(k);
    const Graph& g = model.graph();
    const Graph back = ParseOnnx(SerializeOnnx(g));
    EXPECT_EQ(back.input.shape, g.input.shape);
    EXPECT_EQ(back.outputs, g.outputs);
    EXPECT_EQ(back.initializers, g.initializers);
    ASSERT_EQ(back.nodes.size(), g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      EXPECT_EQ(back.nodes[i].op_type, g.nodes[i].op_type);
      EXPECT_EQ(back.nodes[i].inputs, g.nodes[i].inputs);
      EXPECT_EQ(back.nodes[i].outputs, g.nodes[i].outputs);
      EXPECT_EQ(back.nodes[i].attrs, g.nodes[i].attrs);
    }
  }
  EXPECT_THROW(ParseOnnx("\xff\xff garbage"), ModelError);
}

TEST(LoadModel, SavedClassifierLoads) {
  TempDir dir;
  SaveModel(ReferenceNet(ReferenceKind::kClassifierStub), dir / "cls.onnx");
  EXPECT_TRUE(std::filesystem::exists(dir / "cls.json"));
  const GraphModel m = LoadModel(dir / "cls.onnx", ModelKind::kClassifier);
  EXPECT_EQ(m.output_shapes().front().back(), 2);
  EXPECT_EQ(m.head_kind(), HeadKind::kGapLinear);
  const Tensor x = Standardized(testing::TestPatch());
  EXPECT_EQ(Forward(m, x), Forward(ReferenceNet(ReferenceKind::kClassifierStub), x));
}

TEST(LoadModel, SidecarIsOptional) {
  TempDir dir;
  SaveModel(ReferenceNet(ReferenceKind::kClassifierStub), dir / "cls.onnx");
  std::filesystem::remove(dir / "cls.json");
  const GraphModel m = LoadModel(dir / "cls.onnx", ModelKind::kClassifier);
  EXPECT_EQ(m.head_kind(), HeadKind::kOpaque);
  EXPECT_FALSE(m.gap_linear().has_value());
}

TEST(LoadModel, DetectorAsClassifierIsShapeMismatch) {
  TempDir dir;
  SaveModel(ReferenceNet(ReferenceKind::kDetectorStub), dir / "det.onnx");
  try {
    LoadModel(dir / "det.onnx", ModelKind::kClassifier);
    FAIL() << "expected a ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("shape mismatch"), std::string::npos) << e.what();
  }
}

TEST(LoadModel, MissingLastConvTapIsRejected) {
  TempDir dir;
  Graph g = ReferenceNet(ReferenceKind::kClassifierStub).graph();
  for (Node& n : g.nodes) {
    for (auto& s : n.inputs) if (s == kLastConvTap) s = "features";
    for (auto& s : n.outputs) if (s == kLastConvTap) s = "features";
  }
  testing::WriteFile(dir / "bad.onnx", SerializeOnnx(g));
  try {
    LoadModel(dir / "bad.onnx", ModelKind::kClassifier);
    FAIL() << "expected a ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("last_conv"), std::string::npos) << e.what();
  }
}

TEST(LoadModel, MissingFileAndUnsupportedOps) {
  EXPECT_THROW(LoadModel("/nonexistent/model.onnx", ModelKind::kDetector), ModelError);
  Graph g = ReferenceNet(ReferenceKind::kClassifierStub).graph();
  g.nodes[2].op_type = "LeakyRelu";
  EXPECT_THROW(InferShapes(g), ModelError);
}

}  // namespace
}  // namespace molarcam
