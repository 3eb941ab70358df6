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

// Compiled with -mavx2 only. No -mfma: elementwise results must match the
// scalar table bit for bit.

#include "molarcam/kernels/kernels.h"

#if defined(__AVX2__)
#include <immintrin.h>

namespace molarcam::kernels {
namespace {

double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    i += 4;
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
  double sum = _mm_cvtsd_f64(lo);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void AxpyAvx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ScaleShiftAvx2(const double* x, double* out, std::size_t n, double scale,
                    double shift) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vt = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), vs), vt));
  }
  for (; i < n; ++i) out[i] = x[i] * scale + shift;
}

void BlendAvx2(const double* a, const double* b, double* out, std::size_t n,
               double alpha) {
  const double beta = 1.0 - alpha;
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d lhs = _mm256_mul_pd(vb, _mm256_loadu_pd(a + i));
    __m256d rhs = _mm256_mul_pd(va, _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(lhs, rhs));
  }
  for (; i < n; ++i) out[i] = beta * a[i] + alpha * b[i];
}

void LerpAvx2(const double* a, const double* b, const double* w, double* out,
              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(b + i), va);
    _mm256_storeu_pd(
        out + i, _mm256_add_pd(va, _mm256_mul_pd(_mm256_loadu_pd(w + i), diff)));
  }
  for (; i < n; ++i) out[i] = a[i] + w[i] * (b[i] - a[i]);
}

void ReluAvx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    // Keeps -0.0 and NaN handling identical to the scalar ternary.
    __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(x + i, _mm256_and_pd(v, mask));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace

const KernelTable* Avx2Kernels() {
  static const KernelTable table{Backend::kAvx2, DotAvx2,  AxpyAvx2,
                                 ScaleShiftAvx2, BlendAvx2, LerpAvx2,
                                 ReluAvx2};
  return &table;
}

}  // namespace molarcam::kernels

#else

namespace molarcam::kernels {
const KernelTable* Avx2Kernels() { return nullptr; }
}  // namespace molarcam::kernels

#endif
