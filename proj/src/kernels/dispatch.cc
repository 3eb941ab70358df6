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

#include <atomic>

#include "molarcam/kernels/kernels.h"

namespace molarcam::kernels {
namespace {

const KernelTable* Detect() {
  if (CpuHasAvx2()) {
    if (const KernelTable* avx2 = Avx2Kernels()) return avx2;
  }
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{Detect()};
  return slot;
}

}  // namespace

bool CpuHasAvx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& Active() { return *Slot().load(std::memory_order_acquire); }

bool Select(Backend backend) {
  const KernelTable* table = nullptr;
  switch (backend) {
    case Backend::kScalar:
      table = &ScalarKernels();
      break;
    case Backend::kAvx2:
      table = CpuHasAvx2() ? Avx2Kernels() : nullptr;
      break;
  }
  if (table == nullptr) return false;
  Slot().store(table, std::memory_order_release);
  return true;
}

std::string_view BackendName(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace molarcam::kernels
