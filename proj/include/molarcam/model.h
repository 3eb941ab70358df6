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

#ifndef MOLARCAM_MODEL_H_
#define MOLARCAM_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molarcam/graph.h"
#include "molarcam/tensor.h"

namespace molarcam {

enum class ModelKind { kDetector, kClassifier };
enum class HeadKind { kGapLinear, kOpaque };

inline constexpr std::string_view kLastConvTap = "last_conv";

std::string_view ModelKindName(ModelKind kind);
std::string_view HeadKindName(HeadKind kind);

// Linear head on globally average-pooled tap activations:
// logits = weights * mean_hw(tap) + bias.
struct GapLinearHead {
  std::string tap;
  int classes = 0;
  int channels = 0;
  std::vector<double> weights;  // classes x channels, row-major
  std::vector<double> bias;     // classes

  double weight(int cls, int channel) const {
    return weights[static_cast<std::size_t>(cls) * channels + channel];
  }
};

// Contents of the JSON sidecar written next to a model file.
struct ModelMetadata {
  ModelKind kind = ModelKind::kClassifier;
  HeadKind head = HeadKind::kOpaque;
  std::optional<std::string> fc_weights_source;
};

// An operator graph validated against the detector or classifier contract.
// Immutable; forward passes never mutate it and may run concurrently.
class GraphModel {
 public:
  // Throws ModelError when the graph violates the contract for `kind`:
  // detector 1x{1,3}x832x832 in, one (1,20,N) output; classifier
  // 1x{1,3}x224x224 in, 2 logits out and a last_conv tap. With head
  // kGapLinear the graph must end last_conv -> GlobalAveragePool ->
  // [Flatten] -> Gemm.
  GraphModel(Graph graph, ModelMetadata metadata, std::string identifier);

  ModelKind kind() const { return metadata_.kind; }
  HeadKind head_kind() const { return metadata_.head; }
  const ModelMetadata& metadata() const { return metadata_; }
  const Graph& graph() const { return graph_; }
  const std::string& identifier() const { return identifier_; }

  const Shape& input_shape() const { return graph_.input.shape; }
  std::vector<Shape> output_shapes() const;
  // Names of every intermediate value that can be captured.
  std::vector<std::string> taps() const;
  bool has_tap(std::string_view name) const;
  // Throws ModelError for unknown taps.
  const Shape& tap_shape(std::string_view name) const;

  // Present iff head_kind() == kGapLinear.
  const std::optional<GapLinearHead>& gap_linear() const { return head_; }

 private:
  Graph graph_;
  ModelMetadata metadata_;
  std::string identifier_;
  std::map<std::string, Shape> shapes_;
  std::optional<GapLinearHead> head_;
};

struct ForwardResult {
  std::vector<Tensor> outputs;
  std::map<std::string, Tensor> activations;
};

// Input must match the model's input shape; a single-channel input is
// replicated when the model expects three channels.
std::vector<Tensor> Forward(const GraphModel& model, const Tensor& input);

ForwardResult ForwardWithTaps(const GraphModel& model, const Tensor& input,
                              std::span<const std::string> tap_names);

// Runs only the part of the graph downstream of `tap`, treating
// `activations` as that tap's value.
std::vector<Tensor> ForwardFromTap(const GraphModel& model,
                                   std::string_view tap,
                                   const Tensor& activations);

// Model files are ONNX graphs. The metadata sidecar lives next to the model
// with the extension replaced by ".json"; without one the head is opaque.
std::filesystem::path SidecarPath(const std::filesystem::path& model_path);
GraphModel LoadModel(const std::filesystem::path& path, ModelKind kind);
void SaveModel(const GraphModel& model, const std::filesystem::path& path);

// ONNX wire conversion.
Graph ParseOnnx(const std::string& bytes);
std::string SerializeOnnx(const Graph& graph);

}  // namespace molarcam

#endif  // MOLARCAM_MODEL_H_
