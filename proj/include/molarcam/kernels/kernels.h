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

#ifndef MOLARCAM_KERNELS_KERNELS_H_
#define MOLARCAM_KERNELS_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the graph executor, the CAM combiner and
// the pixel pipeline. Each kernel has a scalar reference implementation and,
// where the CPU supports it, an AVX2 variant picked once at runtime.
//
// Elementwise kernels (axpy, scale_shift, blend, relu, lerp) are written
// without fused multiply-add so both variants round identically. Only `dot`
// may differ between variants, by reduction order.

namespace molarcam::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = x[i] * scale + shift
  void (*scale_shift)(const double* x, double* out, std::size_t n,
                      double scale, double shift);
  // out[i] = (1 - alpha) * a[i] + alpha * b[i]
  void (*blend)(const double* a, const double* b, double* out, std::size_t n,
                double alpha);
  // out[i] = a[i] + w[i] * (b[i] - a[i])
  void (*lerp)(const double* a, const double* b, const double* w, double* out,
               std::size_t n);
  void (*relu)(double* x, std::size_t n);
};

const KernelTable& ScalarKernels();

// nullptr when the binary was built without AVX2 support.
const KernelTable* Avx2Kernels();

bool CpuHasAvx2();

// The table used by the library. Defaults to the best variant the CPU runs.
const KernelTable& Active();

// Overrides the active table; returns false if the backend is unavailable.
bool Select(Backend backend);

std::string_view BackendName(Backend backend);

// Span conveniences over the active table.
inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}
inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void Relu(std::span<double> x) { Active().relu(x.data(), x.size()); }

}  // namespace molarcam::kernels

#endif  // MOLARCAM_KERNELS_KERNELS_H_
