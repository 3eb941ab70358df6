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
#ifndef MOLARCAM_GRAPH_H_
#define MOLARCAM_GRAPH_H_

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "molarcam/tensor.h"

namespace molarcam {

using AttrValue = std::variant<std::int64_t, double, std::string,
                               std::vector<std::int64_t>, std::vector<double>>;

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, AttrValue> attrs;

  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  double GetFloat(const std::string& key, double fallback) const;
  std::vector<std::int64_t> GetInts(const std::string& key,
                                    std::vector<std::int64_t> fallback) const;
};

struct ValueInfo {
  std::string name;
  Shape shape;
};

// A single-input operator graph with nodes in topological order.
struct Graph {
  std::string name;
  ValueInfo input;
  std::vector<std::string> outputs;
  std::map<std::string, Tensor> initializers;
  std::vector<Node> nodes;
};

// Operators the executor implements.
bool IsSupportedOp(const std::string& op_type);

// Static shapes of every value in the graph (input, initializers and node
// outputs). Throws ModelError for unsupported operators, dangling inputs,
// non-topological order or inconsistent shapes.
std::map<std::string, Shape> InferShapes(const Graph& graph);

// Nodes required to compute targets from sources (plus initializers), in
// graph order. Throws ModelError if some target depends on a value that is
// neither a source nor produced downstream of one.
std::vector<const Node*> PlanExecution(const Graph& graph,
                                       const std::vector<std::string>& sources,
                                       const std::vector<std::string>& targets);

// Runs plan with values seeded (graph input and/or tap values). Every
// node output is added to values.
void ExecutePlan(const Graph& graph, const std::vector<const Node*>& plan,
                 std::map<std::string, Tensor>& values);

}  // namespace molarcam

#endif  // MOLARCAM_GRAPH_H_
