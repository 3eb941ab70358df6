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

#include "molarcam/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "molarcam/errors.h"
#include "molarcam/kernels/kernels.h"

namespace molarcam {
namespace {

[[noreturn]] void Fail(const Node& node, const std::string& what) {
  throw ModelError("node '" + node.name + "' (" + node.op_type + "): " + what);
}

const std::set<std::string>& SupportedOps() {
  static const std::set<std::string> ops{
      "Conv",    "Relu",    "Sigmoid", "MaxPool", "AveragePool",
      "GlobalAveragePool", "Flatten", "Gemm", "Add", "Mul", "Concat",
      "Reshape"};
  return ops;
}

struct Pool2d {
  std::int64_t kh, kw, sh, sw, pt, pl, pb, pr;
};

Pool2d WindowParams(const Node& node, const Shape& weight_or_kernel) {
  const auto kernel = node.GetInts("kernel_shape", weight_or_kernel);
  if (kernel.size() != 2) Fail(node, "only 2-D kernels are supported");
  const auto strides = node.GetInts("strides", {1, 1});
  const auto pads = node.GetInts("pads", {0, 0, 0, 0});
  const auto dilations = node.GetInts("dilations", {1, 1});
  if (strides.size() != 2 || pads.size() != 4) Fail(node, "bad strides/pads");
  if (dilations != std::vector<std::int64_t>{1, 1}) {
    Fail(node, "dilation is not supported");
  }
  if (node.attrs.count("auto_pad")) {
    const auto& mode = std::get<std::string>(node.attrs.at("auto_pad"));
    if (mode != "NOTSET") Fail(node, "auto_pad " + mode + " is not supported");
  }
  if (node.GetInt("ceil_mode", 0) != 0) Fail(node, "ceil_mode is not supported");
  if (strides[0] <= 0 || strides[1] <= 0) Fail(node, "strides must be positive");
  return {kernel[0], kernel[1], strides[0], strides[1],
          pads[0],   pads[1],   pads[2],    pads[3]};
}

std::int64_t OutDim(std::int64_t in, std::int64_t k, std::int64_t s,
                    std::int64_t p0, std::int64_t p1) {
  return (in + p0 + p1 - k) / s + 1;
}

Shape Broadcast(const Node& node, const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      Fail(node, "shapes " + ShapeToString(a) + " and " + ShapeToString(b) +
                     " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

Shape ReshapeTarget(const Node& node, const Shape& in, const Tensor& spec) {
  Shape out(spec.data.size());
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto d = static_cast<std::int64_t>(spec.data[i]);
    if (d == 0) {
      if (i >= in.size()) Fail(node, "reshape copies a missing dimension");
      d = in[i];
    }
    if (d == -1) {
      if (infer >= 0) Fail(node, "more than one inferred dimension");
      infer = static_cast<int>(i);
      continue;
    }
    out[i] = d;
    known *= d;
  }
  const std::int64_t total = NumElements(in);
  if (infer >= 0) {
    if (known == 0 || total % known != 0) Fail(node, "cannot infer dimension");
    out[infer] = total / known;
  }
  if (NumElements(out) != total) {
    Fail(node, "reshape " + ShapeToString(in) + " -> " + ShapeToString(out) +
                   " changes the element count");
  }
  return out;
}

Shape NodeOutputShape(const Node& node, const Graph& graph,
                      const std::vector<Shape>& in) {
  const std::string& op = node.op_type;
  auto need_inputs = [&](std::size_t lo, std::size_t hi) {
    if (in.size() < lo || in.size() > hi) Fail(node, "wrong number of inputs");
  };
  if (op == "Relu" || op == "Sigmoid") {
    need_inputs(1, 1);
    return in[0];
  }
  if (op == "Conv") {
    need_inputs(2, 3);
    const Shape& x = in[0];
    const Shape& w = in[1];
    if (x.size() != 4 || w.size() != 4) Fail(node, "Conv expects 4-D tensors");
    if (node.GetInt("group", 1) != 1) Fail(node, "grouped Conv is not supported");
    if (w[1] != x[1]) Fail(node, "weight channels do not match the input");
    if (in.size() == 3 && (in[2].size() != 1 || in[2][0] != w[0])) {
      Fail(node, "bias length does not match output channels");
    }
    const Pool2d p = WindowParams(node, {w[2], w[3]});
    if (p.kh != w[2] || p.kw != w[3]) Fail(node, "kernel_shape disagrees with W");
    const auto oh = OutDim(x[2], p.kh, p.sh, p.pt, p.pb);
    const auto ow = OutDim(x[3], p.kw, p.sw, p.pl, p.pr);
    if (oh <= 0 || ow <= 0) Fail(node, "empty output");
    return {x[0], w[0], oh, ow};
  }
  if (op == "MaxPool" || op == "AveragePool") {
    need_inputs(1, 1);
    const Shape& x = in[0];
    if (x.size() != 4) Fail(node, "pooling expects a 4-D tensor");
    if (!node.attrs.count("kernel_shape")) Fail(node, "missing kernel_shape");
    const Pool2d p = WindowParams(node, {});
    const auto oh = OutDim(x[2], p.kh, p.sh, p.pt, p.pb);
    const auto ow = OutDim(x[3], p.kw, p.sw, p.pl, p.pr);
    if (oh <= 0 || ow <= 0) Fail(node, "empty output");
    return {x[0], x[1], oh, ow};
  }
  if (op == "GlobalAveragePool") {
    need_inputs(1, 1);
    if (in[0].size() != 4) Fail(node, "expects a 4-D tensor");
    return {in[0][0], in[0][1], 1, 1};
  }
  if (op == "Flatten") {
    need_inputs(1, 1);
    auto axis = node.GetInt("axis", 1);
    const auto rank = static_cast<std::int64_t>(in[0].size());
    if (axis < 0) axis += rank;
    if (axis < 0 || axis > rank) Fail(node, "axis out of range");
    std::int64_t outer = 1, inner = 1;
    for (std::int64_t i = 0; i < rank; ++i) (i < axis ? outer : inner) *= in[0][i];
    return {outer, inner};
  }
  if (op == "Gemm") {
    need_inputs(2, 3);
    const Shape& a = in[0];
    const Shape& b = in[1];
    if (a.size() != 2 || b.size() != 2) Fail(node, "Gemm expects 2-D inputs");
    const bool ta = node.GetInt("transA", 0) != 0;
    const bool tb = node.GetInt("transB", 0) != 0;
    const auto m = ta ? a[1] : a[0];
    const auto k = ta ? a[0] : a[1];
    const auto kb = tb ? b[1] : b[0];
    const auto n = tb ? b[0] : b[1];
    if (k != kb) Fail(node, "inner dimensions differ");
    if (in.size() == 3) {
      const Shape out{m, n};
      if (Broadcast(node, out, in[2]) != out) Fail(node, "C does not broadcast");
    }
    return {m, n};
  }
  if (op == "Add" || op == "Mul") {
    need_inputs(2, 2);
    return Broadcast(node, in[0], in[1]);
  }
  if (op == "Concat") {
    if (in.empty()) Fail(node, "no inputs");
    auto axis = node.GetInt("axis", 0);
    const auto rank = static_cast<std::int64_t>(in[0].size());
    if (axis < 0) axis += rank;
    if (axis < 0 || axis >= rank) Fail(node, "axis out of range");
    Shape out = in[0];
    for (std::size_t i = 1; i < in.size(); ++i) {
      if (static_cast<std::int64_t>(in[i].size()) != rank) Fail(node, "rank mismatch");
      for (std::int64_t d = 0; d < rank; ++d) {
        if (d == axis) continue;
        if (in[i][d] != out[d]) Fail(node, "non-axis dimensions differ");
      }
      out[axis] += in[i][axis];
    }
    return out;
  }
  if (op == "Reshape") {
    need_inputs(2, 2);
    auto it = graph.initializers.find(node.inputs[1]);
    if (it == graph.initializers.end()) {
      Fail(node, "target shape must be an initializer");
    }
    return ReshapeTarget(node, in[0], it->second);
  }
  Fail(node, "unsupported operator");
}

// ---- kernels ---------------------------------------------------------------

Tensor RunConv(const Node& node, const Tensor& x, const Tensor& w,
               const Tensor* bias, const Shape& out_shape) {
  const auto& k = kernels::Active();
  const Pool2d p = WindowParams(node, {w.shape[2], w.shape[3]});
  const auto n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const auto m = out_shape[1], oh = out_shape[2], ow = out_shape[3];
  Tensor out = Tensor::Zeros(out_shape);
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t oc = 0; oc < m; ++oc) {
      double* dst = out.data.data() + ((b * m + oc) * oh) * ow;
      if (bias) std::fill(dst, dst + oh * ow, bias->data[oc]);
      for (std::int64_t ic = 0; ic < c; ++ic) {
        const double* src = x.data.data() + ((b * c + ic) * h) * wd;
        for (std::int64_t ky = 0; ky < p.kh; ++ky) {
          for (std::int64_t kx = 0; kx < p.kw; ++kx) {
            const double weight =
                w.data[((oc * c + ic) * p.kh + ky) * p.kw + kx];
            // Output columns whose input column lies inside the image.
            std::int64_t ox0 = 0;
            while (ox0 < ow && ox0 * p.sw - p.pl + kx < 0) ++ox0;
            std::int64_t ox1 = ow;
            while (ox1 > ox0 && (ox1 - 1) * p.sw - p.pl + kx >= wd) --ox1;
            if (ox0 >= ox1) continue;
            for (std::int64_t oy = 0; oy < oh; ++oy) {
              const std::int64_t iy = oy * p.sh - p.pt + ky;
              if (iy < 0 || iy >= h) continue;
              const double* row = src + iy * wd;
              double* orow = dst + oy * ow;
              const std::int64_t ix0 = ox0 * p.sw - p.pl + kx;
              if (p.sw == 1) {
                k.axpy(weight, row + ix0, orow + ox0,
                       static_cast<std::size_t>(ox1 - ox0));
              } else {
                for (std::int64_t ox = ox0; ox < ox1; ++ox) {
                  orow[ox] += weight * row[ix0 + (ox - ox0) * p.sw];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor RunPool(const Node& node, const Tensor& x, const Shape& out_shape,
               bool is_max) {
  const Pool2d p = WindowParams(node, {});
  const bool include_pad = node.GetInt("count_include_pad", 0) != 0;
  const auto planes = x.shape[0] * x.shape[1];
  const auto h = x.shape[2], w = x.shape[3];
  const auto oh = out_shape[2], ow = out_shape[3];
  Tensor out = Tensor::Zeros(out_shape);
  for (std::int64_t pl = 0; pl < planes; ++pl) {
    const double* src = x.data.data() + pl * h * w;
    double* dst = out.data.data() + pl * oh * ow;
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        const std::int64_t y0 = oy * p.sh - p.pt, x0 = ox * p.sw - p.pl;
        double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
        std::int64_t count = 0;
        for (std::int64_t ky = 0; ky < p.kh; ++ky) {
          const std::int64_t iy = y0 + ky;
          if (iy < 0 || iy >= h) continue;
          for (std::int64_t kx = 0; kx < p.kw; ++kx) {
            const std::int64_t ix = x0 + kx;
            if (ix < 0 || ix >= w) continue;
            const double v = src[iy * w + ix];
            if (is_max) {
              acc = std::max(acc, v);
            } else {
              acc += v;
            }
            ++count;
          }
        }
        if (!is_max) {
          const auto denom = include_pad ? p.kh * p.kw : count;
          acc = denom > 0 ? acc / static_cast<double>(denom) : 0.0;
        }
        dst[oy * ow + ox] = acc;
      }
    }
  }
  return out;
}

Tensor RunGlobalAveragePool(const Tensor& x, const Shape& out_shape) {
  const auto planes = x.shape[0] * x.shape[1];
  const auto hw = x.shape[2] * x.shape[3];
  Tensor out = Tensor::Zeros(out_shape);
  for (std::int64_t pl = 0; pl < planes; ++pl) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < hw; ++i) sum += x.data[pl * hw + i];
    out.data[pl] = sum / static_cast<double>(hw);
  }
  return out;
}

Tensor RunGemm(const Node& node, const Tensor& a, const Tensor& b,
               const Tensor* c, const Shape& out_shape) {
  const bool ta = node.GetInt("transA", 0) != 0;
  const bool tb = node.GetInt("transB", 0) != 0;
  const double alpha = node.GetFloat("alpha", 1.0);
  const double beta = node.GetFloat("beta", 1.0);
  const auto m = out_shape[0], n = out_shape[1];
  const auto kdim = ta ? a.shape[0] : a.shape[1];
  const auto& k = kernels::Active();

  std::vector<double> row(kdim), col(kdim);
  Tensor out = Tensor::Zeros(out_shape);
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t q = 0; q < kdim; ++q) {
      row[q] = ta ? a.data[q * a.shape[1] + i] : a.data[i * kdim + q];
    }
    for (std::int64_t j = 0; j < n; ++j) {
      const double* bcol = nullptr;
      if (tb) {
        bcol = b.data.data() + j * kdim;
      } else {
        for (std::int64_t q = 0; q < kdim; ++q) col[q] = b.data[q * n + j];
        bcol = col.data();
      }
      out.data[i * n + j] = alpha * k.dot(row.data(), bcol, kdim);
    }
  }
  if (c) {
    const auto& cs = c->shape;
    for (std::int64_t i = 0; i < m; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        std::int64_t ci = 0;
        if (cs.size() == 2) {
          ci = (cs[0] == 1 ? 0 : i) * cs[1] + (cs[1] == 1 ? 0 : j);
        } else if (cs.size() == 1) {
          ci = cs[0] == 1 ? 0 : j;
        }
        out.data[i * n + j] += beta * c->data[ci];
      }
    }
  }
  return out;
}

Tensor RunBinary(const Tensor& a, const Tensor& b, const Shape& out_shape,
                 bool is_add) {
  Tensor out = Tensor::Zeros(out_shape);
  if (a.shape == out_shape && b.shape == out_shape) {
    if (is_add) {
      out.data = a.data;
      kernels::Active().axpy(1.0, b.data.data(), out.data.data(), out.size());
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    }
    return out;
  }
  const std::size_t rank = out_shape.size();
  auto strides_for = [&](const Shape& s) {
    std::vector<std::int64_t> st(rank, 0);
    std::int64_t acc = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t d = s.size() - 1 - i;
      const std::size_t od = rank - 1 - i;
      st[od] = s[d] == 1 ? 0 : acc;
      acc *= s[d];
    }
    return st;
  };
  const auto sa = strides_for(a.shape);
  const auto sb = strides_for(b.shape);
  std::vector<std::int64_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::int64_t ia = 0, ib = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      ia += idx[d] * sa[d];
      ib += idx[d] * sb[d];
    }
    out.data[flat] = is_add ? a.data[ia] + b.data[ib] : a.data[ia] * b.data[ib];
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

Tensor RunConcat(const Node& node, const std::vector<const Tensor*>& in,
                 const Shape& out_shape) {
  auto axis = node.GetInt("axis", 0);
  if (axis < 0) axis += static_cast<std::int64_t>(out_shape.size());
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t d = 0; d < axis; ++d) outer *= out_shape[d];
  for (std::size_t d = axis + 1; d < out_shape.size(); ++d) inner *= out_shape[d];
  Tensor out = Tensor::Zeros(out_shape);
  std::int64_t offset = 0;
  const auto out_axis = out_shape[axis];
  for (const Tensor* t : in) {
    const auto len = t->shape[axis];
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy_n(t->data.begin() + o * len * inner, len * inner,
                  out.data.begin() + (o * out_axis + offset) * inner);
    }
    offset += len;
  }
  return out;
}

}  // namespace

std::int64_t Node::GetInt(const std::string& key, std::int64_t fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) return fallback;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  throw ModelError("attribute '" + key + "' of node '" + name + "' is not an int");
}

double Node::GetFloat(const std::string& key, double fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) return fallback;
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return double(*v);
  throw ModelError("attribute '" + key + "' of node '" + name + "' is not a float");
}

std::vector<std::int64_t> Node::GetInts(
    const std::string& key, std::vector<std::int64_t> fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) return fallback;
  if (const auto* v = std::get_if<std::vector<std::int64_t>>(&it->second)) return *v;
  throw ModelError("attribute '" + key + "' of node '" + name + "' is not an int list");
}

bool IsSupportedOp(const std::string& op_type) {
  return SupportedOps().count(op_type) > 0;
}

std::map<std::string, Shape> InferShapes(const Graph& graph) {
  std::map<std::string, Shape> shapes;
  shapes[graph.input.name] = graph.input.shape;
  for (const auto& [name, t] : graph.initializers) shapes[name] = t.shape;
  for (const Node& node : graph.nodes) {
    if (!IsSupportedOp(node.op_type)) Fail(node, "unsupported operator");
    if (node.outputs.size() != 1) Fail(node, "exactly one output is supported");
    std::vector<Shape> in;
    for (const std::string& name : node.inputs) {
      if (name.empty()) continue;
      auto it = shapes.find(name);
      if (it == shapes.end()) {
        Fail(node, "input '" + name + "' is not defined before use");
      }
      in.push_back(it->second);
    }
    if (shapes.count(node.outputs[0])) {
      Fail(node, "output '" + node.outputs[0] + "' is defined twice");
    }
    shapes[node.outputs[0]] = NodeOutputShape(node, graph, in);
  }
  for (const std::string& out : graph.outputs) {
    if (!shapes.count(out)) throw ModelError("graph output '" + out + "' is never produced");
  }
  return shapes;
}

std::vector<const Node*> PlanExecution(const Graph& graph,
                                       const std::vector<std::string>& sources,
                                       const std::vector<std::string>& targets) {
  std::map<std::string, std::size_t> producer;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    producer[graph.nodes[i].outputs[0]] = i;
  }
  const std::set<std::string> known(sources.begin(), sources.end());
  std::vector<bool> needed(graph.nodes.size(), false);
  std::vector<std::string> stack(targets.begin(), targets.end());
  std::set<std::string> visited;
  while (!stack.empty()) {
    std::string name = std::move(stack.back());
    stack.pop_back();
    if (!visited.insert(name).second) continue;
    if (known.count(name) || graph.initializers.count(name)) continue;
    auto it = producer.find(name);
    if (it == producer.end()) {
      throw ModelError("value '" + name + "' cannot be computed from the given sources");
    }
    needed[it->second] = true;
    for (const std::string& in : graph.nodes[it->second].inputs) {
      if (!in.empty()) stack.push_back(in);
    }
  }
  std::vector<const Node*> plan;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (needed[i]) plan.push_back(&graph.nodes[i]);
  }
  return plan;
}

void ExecutePlan(const Graph& graph, const std::vector<const Node*>& plan,
                 std::map<std::string, Tensor>& values) {
  auto lookup = [&](const Node& node, std::size_t i) -> const Tensor* {
    if (i >= node.inputs.size() || node.inputs[i].empty()) return nullptr;
    const std::string& name = node.inputs[i];
    if (auto it = values.find(name); it != values.end()) return &it->second;
    if (auto it = graph.initializers.find(name); it != graph.initializers.end()) {
      return &it->second;
    }
    Fail(node, "input '" + name + "' has no value");
  };

  for (const Node* np : plan) {
    const Node& node = *np;
    std::vector<Shape> in_shapes;
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (node.inputs[i].empty()) continue;
      in_shapes.push_back(lookup(node, i)->shape);
    }
    const Shape out_shape = NodeOutputShape(node, graph, in_shapes);
    const std::string& op = node.op_type;
    const Tensor& x = *lookup(node, 0);
    Tensor out;
    if (op == "Conv") {
      out = RunConv(node, x, *lookup(node, 1), lookup(node, 2), out_shape);
    } else if (op == "Relu") {
      out = x;
      kernels::Active().relu(out.data.data(), out.size());
    } else if (op == "Sigmoid") {
      out = x;
      for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    } else if (op == "MaxPool" || op == "AveragePool") {
      out = RunPool(node, x, out_shape, op == "MaxPool");
    } else if (op == "GlobalAveragePool") {
      out = RunGlobalAveragePool(x, out_shape);
    } else if (op == "Flatten" || op == "Reshape") {
      out = Tensor(out_shape, x.data);
    } else if (op == "Gemm") {
      out = RunGemm(node, x, *lookup(node, 1), lookup(node, 2), out_shape);
    } else if (op == "Add" || op == "Mul") {
      out = RunBinary(x, *lookup(node, 1), out_shape, op == "Add");
    } else if (op == "Concat") {
      std::vector<const Tensor*> parts;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) parts.push_back(lookup(node, i));
      out = RunConcat(node, parts, out_shape);
    } else {
      Fail(node, "unsupported operator");
    }
    out.dtype = DataType::kFloat64;
    values[node.outputs[0]] = std::move(out);
  }
}

}  // namespace molarcam
