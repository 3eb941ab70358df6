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
#ifndef MOLARCAM_TENSOR_H_
#define MOLARCAM_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace molarcam {

using Shape = std::vector<std::int64_t>;

// Storage type a tensor had on disk. Values are always held as double.
enum class DataType { kFloat32, kFloat64, kInt64 };

std::int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Row-major dense tensor.
struct Tensor {
  Shape shape;
  std::vector<double> data;
  DataType dtype = DataType::kFloat64;

  Tensor() = default;
  // Throws InvariantError when data.size() != product(shape).
  Tensor(Shape shape, std::vector<double> data,
         DataType dtype = DataType::kFloat64);

  static Tensor Zeros(Shape shape);

  std::size_t size() const { return data.size(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape && a.data == b.data;
  }
};

}  // namespace molarcam

#endif  // MOLARCAM_TENSOR_H_
