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
#include "molarcam/tensor.h"

#include "molarcam/errors.h"

namespace molarcam {

std::int64_t NumElements(const Shape& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape s, std::vector<double> d, DataType t)
    : shape(std::move(s)), data(std::move(d)), dtype(t) {
  for (std::int64_t dim : shape) {
    if (dim < 0) throw InvariantError("negative tensor dimension");
  }
  if (static_cast<std::int64_t>(data.size()) != NumElements(shape)) {
    throw InvariantError("tensor of shape " + ShapeToString(shape) + " given " +
                         std::to_string(data.size()) + " values");
  }
}

Tensor Tensor::Zeros(Shape s) {
  const auto n = static_cast<std::size_t>(NumElements(s));
  return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

}  // namespace molarcam
