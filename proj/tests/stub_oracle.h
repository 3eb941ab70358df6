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

// Straight-line re-implementation of the reference classifier stub, written
// independently of the graph executor: forward pass, last_conv activations
// and the input gradient of a logit by hand-written backpropagation.

#ifndef MOLARCAM_TESTS_STUB_ORACLE_H_
#define MOLARCAM_TESTS_STUB_ORACLE_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "molarcam/reference_nets.h"

namespace molarcam::testing {

class ClassifierStubOracle {
 public:
  static constexpr int kIn = 224, kStem = 16, kPool = 8, kC1 = 4, kC2 = 8;

  ClassifierStubOracle() {
    LcgWeights lcg;
    for (auto& v : w1_) v = lcg.Next();
    for (auto& v : w2_) v = lcg.Next();
    for (auto& v : fc_) v = lcg.Next();
    for (auto& v : b_) v = lcg.Next();
  }

  double fc(int c, int k) const { return fc_[c * kC2 + k]; }
  double bias(int c) const { return b_[c]; }

  // `input` holds 224*224 standardized values.
  void Forward(const std::vector<double>& input) {
    for (int y = 0; y < kStem; ++y) {
      for (int x = 0; x < kStem; ++x) {
        double s = 0.0;
        for (int dy = 0; dy < 14; ++dy) {
          for (int dx = 0; dx < 14; ++dx) s += input[(y * 14 + dy) * kIn + x * 14 + dx];
        }
        stem_[y * kStem + x] = s / 196.0;
      }
    }
    for (int o = 0; o < kC1; ++o) {
      for (int y = 0; y < kStem; ++y) {
        for (int x = 0; x < kStem; ++x) {
          double s = 0.0;
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              const int yy = y + dy - 1, xx = x + dx - 1;
              if (yy < 0 || yy >= kStem || xx < 0 || xx >= kStem) continue;
              s += w1_[o * 9 + dy * 3 + dx] * stem_[yy * kStem + xx];
            }
          }
          c1_[(o * kStem + y) * kStem + x] = s;
        }
      }
    }
    for (int o = 0; o < kC1; ++o) {
      for (int y = 0; y < kPool; ++y) {
        for (int x = 0; x < kPool; ++x) {
          double best = -1e300;
          int arg = 0;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const int idx = (o * kStem + 2 * y + dy) * kStem + 2 * x + dx;
              const double v = std::max(0.0, c1_[idx]);
              if (v > best) best = v, arg = idx;
            }
          }
          p1_[(o * kPool + y) * kPool + x] = best;
          argmax_[(o * kPool + y) * kPool + x] = arg;
        }
      }
    }
    for (int o = 0; o < kC2; ++o) {
      for (int y = 0; y < kPool; ++y) {
        for (int x = 0; x < kPool; ++x) {
          double s = 0.0;
          for (int i = 0; i < kC1; ++i) {
            for (int dy = 0; dy < 3; ++dy) {
              for (int dx = 0; dx < 3; ++dx) {
                const int yy = y + dy - 1, xx = x + dx - 1;
                if (yy < 0 || yy >= kPool || xx < 0 || xx >= kPool) continue;
                s += w2_[((o * kC1 + i) * 3 + dy) * 3 + dx] * p1_[(i * kPool + yy) * kPool + xx];
              }
            }
          }
          c2_[(o * kPool + y) * kPool + x] = s;
        }
      }
    }
    for (int k = 0; k < kC2; ++k) {
      double s = 0.0;
      for (int i = 0; i < kPool * kPool; ++i) s += std::max(0.0, c2_[k * 64 + i]);
      gap_[k] = s / 64.0;
    }
    for (int c = 0; c < 2; ++c) {
      double s = b_[c];
      for (int k = 0; k < kC2; ++k) s += fc_[c * kC2 + k] * gap_[k];
      logits_[c] = s;
    }
  }

  const std::array<double, 2>& logits() const { return logits_; }

  // ReLU(conv2), 8x8x8.
  std::vector<double> last_conv() const {
    std::vector<double> a(c2_.begin(), c2_.end());
    for (double& v : a) v = std::max(0.0, v);
    return a;
  }

  // d logit_c / d input, 224*224, for the input of the last Forward call.
  std::vector<double> InputGradient(int c) const {
    std::array<double, kC2 * 64> dc2{};
    for (int k = 0; k < kC2; ++k) {
      for (int i = 0; i < 64; ++i) dc2[k * 64 + i] = c2_[k * 64 + i] > 0 ? fc_[c * kC2 + k] / 64.0 : 0.0;
    }
    std::array<double, kC1 * 64> dp1{};
    for (int o = 0; o < kC2; ++o) {
      for (int y = 0; y < kPool; ++y) {
        for (int x = 0; x < kPool; ++x) {
          const double g = dc2[(o * kPool + y) * kPool + x];
          if (g == 0.0) continue;
          for (int i = 0; i < kC1; ++i) {
            for (int dy = 0; dy < 3; ++dy) {
              for (int dx = 0; dx < 3; ++dx) {
                const int yy = y + dy - 1, xx = x + dx - 1;
                if (yy < 0 || yy >= kPool || xx < 0 || xx >= kPool) continue;
                dp1[(i * kPool + yy) * kPool + xx] += g * w2_[((o * kC1 + i) * 3 + dy) * 3 + dx];
              }
            }
          }
        }
      }
    }
    std::array<double, kC1 * kStem * kStem> dc1{};
    for (int i = 0; i < kC1 * 64; ++i) {
      const int idx = argmax_[i];
      if (c1_[idx] > 0) dc1[idx] += dp1[i];
    }
    std::array<double, kStem * kStem> dstem{};
    for (int o = 0; o < kC1; ++o) {
      for (int y = 0; y < kStem; ++y) {
        for (int x = 0; x < kStem; ++x) {
          const double g = dc1[(o * kStem + y) * kStem + x];
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              const int yy = y + dy - 1, xx = x + dx - 1;
              if (yy < 0 || yy >= kStem || xx < 0 || xx >= kStem) continue;
              dstem[yy * kStem + xx] += g * w1_[o * 9 + dy * 3 + dx];
            }
          }
        }
      }
    }
    std::vector<double> grad(kIn * kIn);
    for (int y = 0; y < kIn; ++y) {
      for (int x = 0; x < kIn; ++x) grad[y * kIn + x] = dstem[(y / 14) * kStem + x / 14] / 196.0;
    }
    return grad;
  }

 private:
  std::array<double, kC1 * 9> w1_{};
  std::array<double, kC2 * kC1 * 9> w2_{};
  std::array<double, 2 * kC2> fc_{};
  std::array<double, 2> b_{};
  std::array<double, kStem * kStem> stem_{};
  std::array<double, kC1 * kStem * kStem> c1_{};
  std::array<double, kC1 * 64> p1_{};
  std::array<int, kC1 * 64> argmax_{};
  std::array<double, kC2 * 64> c2_{};
  std::array<double, kC2> gap_{};
  std::array<double, 2> logits_{};
};

// Fixed smooth test pattern in [0,1] with enough structure to light up
// several channels.
inline std::vector<double> TestPatch() {
  std::vector<double> p(224 * 224);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) {
      const double dx = x - 150.0, dy = y - 80.0;
      const double blob = std::exp(-(dx * dx + dy * dy) / (2 * 30.0 * 30.0));
      const double ramp = 0.3 * x / 223.0;
      p[y * 224 + x] = std::clamp(0.1 + 0.6 * blob + ramp + 0.05 * std::sin(y * 0.21), 0.0, 1.0);
    }
  }
  return p;
}

}  // namespace molarcam::testing

#endif  // MOLARCAM_TESTS_STUB_ORACLE_H_
