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

// Conversion between the in-memory Graph and ONNX ModelProto bytes.

#include <cstring>
#include <set>

#include "molarcam/errors.h"
#include "molarcam/model.h"
#include "onnx_subset.pb.h"

namespace molarcam {
namespace {

constexpr int kOnnxFloat = onnx::TensorProto::FLOAT;
constexpr int kOnnxDouble = onnx::TensorProto::DOUBLE;
constexpr int kOnnxInt32 = onnx::TensorProto::INT32;
constexpr int kOnnxInt64 = onnx::TensorProto::INT64;

template <typename T>
std::vector<double> FromRaw(const std::string& raw, std::size_t count,
                            const std::string& name) {
  if (raw.size() != count * sizeof(T)) {
    throw ModelError("initializer '" + name + "' raw_data has the wrong size");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(v);
  }
  return out;
}

Tensor FromProto(const onnx::TensorProto& t) {
  Shape shape(t.dims().begin(), t.dims().end());
  const auto count = static_cast<std::size_t>(NumElements(shape));
  const std::string& name = t.name();
  std::vector<double> data;
  DataType dtype = DataType::kFloat64;
  const bool raw = t.has_raw_data();
  switch (t.data_type()) {
    case kOnnxFloat:
      dtype = DataType::kFloat32;
      data = raw ? FromRaw<float>(t.raw_data(), count, name)
                 : std::vector<double>(t.float_data().begin(), t.float_data().end());
      break;
    case kOnnxDouble:
      data = raw ? FromRaw<double>(t.raw_data(), count, name)
                 : std::vector<double>(t.double_data().begin(), t.double_data().end());
      break;
    case kOnnxInt64:
      dtype = DataType::kInt64;
      data = raw ? FromRaw<std::int64_t>(t.raw_data(), count, name)
                 : std::vector<double>(t.int64_data().begin(), t.int64_data().end());
      break;
    case kOnnxInt32:
      dtype = DataType::kInt64;
      data = raw ? FromRaw<std::int32_t>(t.raw_data(), count, name)
                 : std::vector<double>(t.int32_data().begin(), t.int32_data().end());
      break;
    default:
      throw ModelError("initializer '" + name + "' has unsupported data type " +
                       std::to_string(t.data_type()));
  }
  if (data.size() != count) {
    throw ModelError("initializer '" + name + "' holds " +
                     std::to_string(data.size()) + " values for shape " +
                     ShapeToString(shape));
  }
  return Tensor(std::move(shape), std::move(data), dtype);
}

void ToProto(const std::string& name, const Tensor& t, onnx::TensorProto* out) {
  out->set_name(name);
  for (auto d : t.shape) out->add_dims(d);
  switch (t.dtype) {
    case DataType::kFloat32:
      out->set_data_type(kOnnxFloat);
      for (double v : t.data) out->add_float_data(static_cast<float>(v));
      break;
    case DataType::kFloat64:
      out->set_data_type(kOnnxDouble);
      for (double v : t.data) out->add_double_data(v);
      break;
    case DataType::kInt64:
      out->set_data_type(kOnnxInt64);
      for (double v : t.data) out->add_int64_data(static_cast<std::int64_t>(v));
      break;
  }
}

AttrValue FromAttribute(const onnx::AttributeProto& a) {
  using AP = onnx::AttributeProto;
  AP::AttributeType type = a.type();
  if (type == AP::UNDEFINED) {
    if (a.ints_size()) type = AP::INTS;
    else if (a.floats_size()) type = AP::FLOATS;
    else if (a.has_s()) type = AP::STRING;
    else if (a.has_f()) type = AP::FLOAT;
    else type = AP::INT;
  }
  switch (type) {
    case AP::FLOAT:
      return static_cast<double>(a.f());
    case AP::INT:
      return static_cast<std::int64_t>(a.i());
    case AP::STRING:
      return a.s();
    case AP::INTS:
      return std::vector<std::int64_t>(a.ints().begin(), a.ints().end());
    case AP::FLOATS:
      return std::vector<double>(a.floats().begin(), a.floats().end());
    default:
      throw ModelError("attribute '" + a.name() + "' has an unsupported type");
  }
}

void ToAttribute(const std::string& name, const AttrValue& v,
                 onnx::AttributeProto* out) {
  using AP = onnx::AttributeProto;
  out->set_name(name);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          out->set_type(AP::INT);
          out->set_i(x);
        } else if constexpr (std::is_same_v<T, double>) {
          out->set_type(AP::FLOAT);
          out->set_f(static_cast<float>(x));
        } else if constexpr (std::is_same_v<T, std::string>) {
          out->set_type(AP::STRING);
          out->set_s(x);
        } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
          out->set_type(AP::INTS);
          for (auto i : x) out->add_ints(i);
        } else {
          out->set_type(AP::FLOATS);
          for (auto f : x) out->add_floats(static_cast<float>(f));
        }
      },
      v);
}

Shape ShapeFromValueInfo(const onnx::ValueInfoProto& vi) {
  if (!vi.type().has_tensor_type() || !vi.type().tensor_type().has_shape()) {
    throw ModelError("graph input '" + vi.name() + "' has no static shape");
  }
  Shape shape;
  const auto& dims = vi.type().tensor_type().shape().dim();
  for (int i = 0; i < dims.size(); ++i) {
    if (dims[i].has_dim_value()) {
      shape.push_back(dims[i].dim_value());
    } else if (i == 0) {
      shape.push_back(1);  // symbolic batch; inference runs with batch 1
    } else {
      throw ModelError("graph input '" + vi.name() + "' has a symbolic dimension");
    }
  }
  return shape;
}

void FillValueInfo(const std::string& name, const Shape& shape,
                   onnx::ValueInfoProto* out) {
  out->set_name(name);
  auto* tt = out->mutable_type()->mutable_tensor_type();
  tt->set_elem_type(kOnnxDouble);
  auto* s = tt->mutable_shape();
  for (auto d : shape) s->add_dim()->set_dim_value(d);
}

}  // namespace

Graph ParseOnnx(const std::string& bytes) {
  onnx::ModelProto model;
  if (!model.ParseFromString(bytes)) {
    throw ModelError("model file is not a valid ONNX protobuf");
  }
  if (!model.has_graph()) throw ModelError("ONNX model has no graph");
  const onnx::GraphProto& g = model.graph();

  Graph graph;
  graph.name = g.name();
  for (const auto& init : g.initializer()) {
    graph.initializers[init.name()] = FromProto(init);
  }
  const onnx::ValueInfoProto* input = nullptr;
  for (const auto& vi : g.input()) {
    if (graph.initializers.count(vi.name())) continue;
    if (input) throw ModelError("model must have exactly one runtime input");
    input = &vi;
  }
  if (!input) throw ModelError("model has no runtime input");
  graph.input = {input->name(), ShapeFromValueInfo(*input)};
  for (const auto& vi : g.output()) graph.outputs.push_back(vi.name());

  for (const auto& n : g.node()) {
    if (!n.domain().empty() && n.domain() != "ai.onnx") {
      throw ModelError("operator domain '" + n.domain() + "' is not supported");
    }
    Node node;
    node.name = n.name().empty() ? n.output(0) : n.name();
    node.op_type = n.op_type();
    node.inputs.assign(n.input().begin(), n.input().end());
    node.outputs.assign(n.output().begin(), n.output().end());
    for (const auto& a : n.attribute()) node.attrs[a.name()] = FromAttribute(a);
    graph.nodes.push_back(std::move(node));
  }
  return graph;
}

std::string SerializeOnnx(const Graph& graph) {
  onnx::ModelProto model;
  model.set_ir_version(7);
  model.set_producer_name("molarcam");
  auto* opset = model.add_opset_import();
  opset->set_domain("");
  opset->set_version(13);

  const auto shapes = InferShapes(graph);
  onnx::GraphProto* g = model.mutable_graph();
  g->set_name(graph.name);
  FillValueInfo(graph.input.name, graph.input.shape, g->add_input());
  for (const auto& out : graph.outputs) {
    FillValueInfo(out, shapes.at(out), g->add_output());
  }
  for (const auto& [name, t] : graph.initializers) ToProto(name, t, g->add_initializer());
  for (const Node& node : graph.nodes) {
    auto* n = g->add_node();
    n->set_name(node.name);
    n->set_op_type(node.op_type);
    for (const auto& in : node.inputs) n->add_input(in);
    for (const auto& out : node.outputs) n->add_output(out);
    for (const auto& [key, value] : node.attrs) ToAttribute(key, value, n->add_attribute());
  }
  std::string bytes;
  if (!model.SerializeToString(&bytes)) {
    throw InvariantError("failed to serialize ONNX model");
  }
  return bytes;
}

}  // namespace molarcam
