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

#include "molarcam/kernels/kernels.h"

namespace molarcam::kernels {
namespace {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void AxpyScalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void ScaleShiftScalar(const double* x, double* out, std::size_t n,
                      double scale, double shift) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * scale + shift;
}

void BlendScalar(const double* a, const double* b, double* out, std::size_t n,
                 double alpha) {
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < n; ++i) out[i] = beta * a[i] + alpha * b[i];
}

void LerpScalar(const double* a, const double* b, const double* w, double* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + w[i] * (b[i] - a[i]);
}

void ReluScalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{Backend::kScalar, DotScalar,  AxpyScalar,
                                 ScaleShiftScalar, BlendScalar, LerpScalar,
                                 ReluScalar};
  return table;
}

}  // namespace molarcam::kernels
