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

#include "molarcam/model.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "molarcam/errors.h"

namespace molarcam {
namespace {

std::vector<const Node*> Consumers(const Graph& graph, const std::string& value) {
  std::vector<const Node*> out;
  for (const Node& node : graph.nodes) {
    if (std::find(node.inputs.begin(), node.inputs.end(), value) != node.inputs.end()) {
      out.push_back(&node);
    }
  }
  return out;
}

const Node* SoleConsumer(const Graph& graph, const std::string& value,
                         const std::string& what) {
  const auto consumers = Consumers(graph, value);
  if (consumers.size() != 1) {
    throw ModelError("gap_linear head: '" + value + "' must feed exactly one " +
                     what + " node");
  }
  return consumers.front();
}

GapLinearHead ExtractGapLinearHead(const Graph& graph,
                                   const std::map<std::string, Shape>& shapes,
                                   const ModelMetadata& meta) {
  GapLinearHead head;
  head.tap = std::string(kLastConvTap);
  const Node* gap = SoleConsumer(graph, head.tap, "GlobalAveragePool");
  if (gap->op_type != "GlobalAveragePool") {
    throw ModelError("gap_linear head: last_conv feeds " + gap->op_type +
                     ", expected GlobalAveragePool");
  }
  const Node* next = SoleConsumer(graph, gap->outputs[0], "Flatten or Gemm");
  if (next->op_type == "Flatten" || next->op_type == "Reshape") {
    next = SoleConsumer(graph, next->outputs[0], "Gemm");
  }
  if (next->op_type != "Gemm") {
    throw ModelError("gap_linear head: expected Gemm after pooling, found " +
                     next->op_type);
  }
  const Node& gemm = *next;
  if (std::find(graph.outputs.begin(), graph.outputs.end(), gemm.outputs[0]) ==
      graph.outputs.end()) {
    throw ModelError("gap_linear head: Gemm output is not a graph output");
  }
  if (gemm.GetInt("transA", 0) != 0) {
    throw ModelError("gap_linear head: transA is not supported");
  }
  const std::string& weight_name = gemm.inputs[1];
  if (meta.fc_weights_source && *meta.fc_weights_source != weight_name) {
    throw ModelError("gap_linear head: fc_weights_source '" +
                     *meta.fc_weights_source + "' is not the Gemm weight '" +
                     weight_name + "'");
  }
  auto wit = graph.initializers.find(weight_name);
  if (wit == graph.initializers.end()) {
    throw ModelError("gap_linear head: Gemm weight must be an initializer");
  }
  const Tensor& w = wit->second;
  const bool tb = gemm.GetInt("transB", 0) != 0;
  const double alpha = gemm.GetFloat("alpha", 1.0);
  const double beta = gemm.GetFloat("beta", 1.0);
  const Shape& tap_shape = shapes.at(head.tap);
  head.channels = static_cast<int>(tap_shape[1]);
  head.classes = static_cast<int>(tb ? w.shape[0] : w.shape[1]);
  const auto k = tb ? w.shape[1] : w.shape[0];
  if (k != head.channels) {
    throw ModelError("gap_linear head: weight has " + std::to_string(k) +
                     " columns but last_conv has " +
                     std::to_string(head.channels) + " channels");
  }
  head.weights.resize(static_cast<std::size_t>(head.classes) * head.channels);
  for (int c = 0; c < head.classes; ++c) {
    for (int ch = 0; ch < head.channels; ++ch) {
      const double v = tb ? w.data[static_cast<std::size_t>(c) * head.channels + ch]
                          : w.data[static_cast<std::size_t>(ch) * head.classes + c];
      head.weights[static_cast<std::size_t>(c) * head.channels + ch] = alpha * v;
    }
  }
  head.bias.assign(head.classes, 0.0);
  if (gemm.inputs.size() > 2 && !gemm.inputs[2].empty()) {
    auto bit = graph.initializers.find(gemm.inputs[2]);
    if (bit == graph.initializers.end()) {
      throw ModelError("gap_linear head: Gemm bias must be an initializer");
    }
    const Tensor& b = bit->second;
    for (int c = 0; c < head.classes; ++c) {
      head.bias[c] = beta * b.data[b.size() == 1 ? 0 : c];
    }
  }
  return head;
}

void RequireInput(const Shape& shape, std::int64_t side, ModelKind kind) {
  const bool ok = shape.size() == 4 && shape[0] == 1 &&
                  (shape[1] == 1 || shape[1] == 3) && shape[2] == side &&
                  shape[3] == side;
  if (!ok) {
    throw ModelError("shape mismatch: " + std::string(ModelKindName(kind)) +
                     " input must be 1x1x" + std::to_string(side) + "x" +
                     std::to_string(side) + ", model declares " +
                     ShapeToString(shape));
  }
}

Tensor PrepareInput(const GraphModel& model, const Tensor& input) {
  const Shape& want = model.input_shape();
  if (input.shape == want) return input;
  if (input.shape.size() == 4 && want.size() == 4 && input.shape[1] == 1 &&
      want[1] == 3 && input.shape[0] == want[0] && input.shape[2] == want[2] &&
      input.shape[3] == want[3]) {
    Tensor rgb = Tensor::Zeros(want);
    const std::size_t plane = input.size();
    for (int c = 0; c < 3; ++c) {
      std::copy(input.data.begin(), input.data.end(), rgb.data.begin() + c * plane);
    }
    return rgb;
  }
  throw ModelError("shape mismatch: input " + ShapeToString(input.shape) +
                   ", model expects " + ShapeToString(want));
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelKind ParseKind(const std::string& s) {
  if (s == "detector") return ModelKind::kDetector;
  if (s == "classifier") return ModelKind::kClassifier;
  throw ModelError("unknown model kind '" + s + "' in sidecar");
}

HeadKind ParseHead(const std::string& s) {
  if (s == "gap_linear") return HeadKind::kGapLinear;
  if (s == "opaque") return HeadKind::kOpaque;
  throw ModelError("unknown head kind '" + s + "' in sidecar");
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kDetector ? "detector" : "classifier";
}

std::string_view HeadKindName(HeadKind kind) {
  return kind == HeadKind::kGapLinear ? "gap_linear" : "opaque";
}

GraphModel::GraphModel(Graph graph, ModelMetadata metadata,
                       std::string identifier)
    : graph_(std::move(graph)),
      metadata_(std::move(metadata)),
      identifier_(std::move(identifier)) {
  shapes_ = InferShapes(graph_);
  if (graph_.outputs.size() != 1) {
    throw ModelError("shape mismatch: model must have exactly one output");
  }
  const Shape& out = shapes_.at(graph_.outputs[0]);
  if (metadata_.kind == ModelKind::kDetector) {
    RequireInput(graph_.input.shape, 832, metadata_.kind);
    const bool ok = (out.size() == 3 && out[0] == 1 && out[1] == 20) ||
                    (out.size() == 2 && out[0] == 20);
    if (!ok) {
      throw ModelError("shape mismatch: detector output must be (1,20,N), got " +
                       ShapeToString(out));
    }
    if (metadata_.head == HeadKind::kGapLinear) {
      throw ModelError("detector models cannot declare a gap_linear head");
    }
  } else {
    RequireInput(graph_.input.shape, 224, metadata_.kind);
    if (NumElements(out) != 2) {
      throw ModelError("shape mismatch: classifier must emit 2 logits, got " +
                       ShapeToString(out));
    }
    auto tap = shapes_.find(std::string(kLastConvTap));
    const bool produced =
        std::any_of(graph_.nodes.begin(), graph_.nodes.end(), [](const Node& n) {
          return n.outputs[0] == kLastConvTap;
        });
    if (tap == shapes_.end() || !produced) {
      throw ModelError("classifier is missing the 'last_conv' tap");
    }
    if (tap->second.size() != 4) {
      throw ModelError("'last_conv' must be a 4-D activation, got " +
                       ShapeToString(tap->second));
    }
    if (metadata_.head == HeadKind::kGapLinear) {
      head_ = ExtractGapLinearHead(graph_, shapes_, metadata_);
      if (head_->classes != 2) {
        throw ModelError("gap_linear head must have 2 classes");
      }
    }
  }
}

std::vector<Shape> GraphModel::output_shapes() const {
  std::vector<Shape> out;
  for (const auto& name : graph_.outputs) out.push_back(shapes_.at(name));
  return out;
}

std::vector<std::string> GraphModel::taps() const {
  std::vector<std::string> out;
  for (const Node& node : graph_.nodes) out.push_back(node.outputs[0]);
  return out;
}

bool GraphModel::has_tap(std::string_view name) const {
  return std::any_of(graph_.nodes.begin(), graph_.nodes.end(),
                     [&](const Node& n) { return n.outputs[0] == name; });
}

const Shape& GraphModel::tap_shape(std::string_view name) const {
  if (!has_tap(name)) throw ModelError("unknown tap '" + std::string(name) + "'");
  return shapes_.at(std::string(name));
}

std::vector<Tensor> Forward(const GraphModel& model, const Tensor& input) {
  return ForwardWithTaps(model, input, {}).outputs;
}

ForwardResult ForwardWithTaps(const GraphModel& model, const Tensor& input,
                              std::span<const std::string> tap_names) {
  for (const auto& tap : tap_names) model.tap_shape(tap);
  const Graph& graph = model.graph();
  std::map<std::string, Tensor> values;
  values[graph.input.name] = PrepareInput(model, input);
  const auto plan = PlanExecution(graph, {graph.input.name}, graph.outputs);
  ExecutePlan(graph, plan, values);
  ForwardResult result;
  for (const auto& name : graph.outputs) result.outputs.push_back(values.at(name));
  for (const auto& tap : tap_names) {
    auto it = values.find(tap);
    if (it == values.end()) {
      // Tap is not on the path to the output; run the nodes that produce it.
      ExecutePlan(graph, PlanExecution(graph, {graph.input.name}, {tap}), values);
      it = values.find(tap);
    }
    result.activations[tap] = it->second;
  }
  return result;
}

std::vector<Tensor> ForwardFromTap(const GraphModel& model,
                                   std::string_view tap,
                                   const Tensor& activations) {
  const Shape& shape = model.tap_shape(tap);
  if (activations.shape != shape) {
    throw ModelError("shape mismatch: tap '" + std::string(tap) + "' expects " +
                     ShapeToString(shape) + ", got " +
                     ShapeToString(activations.shape));
  }
  const Graph& graph = model.graph();
  const std::string name(tap);
  std::map<std::string, Tensor> values;
  values[name] = activations;
  const auto plan = PlanExecution(graph, {name}, graph.outputs);
  ExecutePlan(graph, plan, values);
  std::vector<Tensor> outputs;
  for (const auto& out : graph.outputs) outputs.push_back(values.at(out));
  return outputs;
}

std::filesystem::path SidecarPath(const std::filesystem::path& model_path) {
  std::filesystem::path p = model_path;
  p.replace_extension(".json");
  return p;
}

GraphModel LoadModel(const std::filesystem::path& path, ModelKind kind) {
  if (!std::filesystem::exists(path)) {
    throw ModelError("model file not found: " + path.string());
  }
  Graph graph = ParseOnnx(ReadFile(path));

  ModelMetadata meta;
  meta.kind = kind;
  std::optional<ModelKind> declared;
  const auto sidecar = SidecarPath(path);
  if (sidecar != path && std::filesystem::exists(sidecar)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(sidecar));
      if (j.contains("kind")) declared = ParseKind(j.at("kind").get<std::string>());
      if (j.contains("head")) meta.head = ParseHead(j.at("head").get<std::string>());
      if (j.contains("fc_weights_source") && !j.at("fc_weights_source").is_null()) {
        meta.fc_weights_source = j.at("fc_weights_source").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ModelError("malformed model sidecar " + sidecar.string() + ": " + e.what());
    }
  }
  GraphModel model(std::move(graph), meta, path.string());
  if (declared && *declared != kind) {
    throw ModelError("model " + path.string() + " is declared as a " +
                     std::string(ModelKindName(*declared)) + ", loaded as a " +
                     std::string(ModelKindName(kind)));
  }
  return model;
}

void SaveModel(const GraphModel& model, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << SerializeOnnx(model.graph());
  }
  nlohmann::json j;
  j["kind"] = ModelKindName(model.kind());
  j["head"] = HeadKindName(model.head_kind());
  if (model.metadata().fc_weights_source) {
    j["fc_weights_source"] = *model.metadata().fc_weights_source;
  } else {
    j["fc_weights_source"] = nullptr;
  }
  std::ofstream side(SidecarPath(path));
  if (!side) throw InputError("cannot write " + SidecarPath(path).string());
  side << j.dump(2) << "\n";
}

}  // namespace molarcam
