// Copyright 2026 The xsng Authors
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

// AArch64 only; Advanced SIMD is mandatory there so no runtime probe is
// needed beyond the architecture check.

#include "xsng/simd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace xsng::simd {
namespace {

void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_rs, std::size_t a_cs, const double* b, double* c,
               bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * a_rs;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t acc0 = accumulate ? vld1q_f64(ci + j) : vdupq_n_f64(0.0);
      float64x2_t acc1 = accumulate ? vld1q_f64(ci + j + 2) : vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(ai[p * a_cs]);
        acc0 = vfmaq_f64(acc0, av, vld1q_f64(b + p * n + j));
        acc1 = vfmaq_f64(acc1, av, vld1q_f64(b + p * n + j + 2));
      }
      vst1q_f64(ci + j, acc0);
      vst1q_f64(ci + j + 2, acc1);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc = std::fma(ai[p * a_cs], b[p * n + j], acc);
      ci[j] = acc;
    }
  }
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(x + i), vld1q_f64(y + i));
    s1 = vfmaq_f64(s1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double total = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) total = std::fma(x[i], y[i], total);
  return total;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{Isa::Neon, gemm_neon, dot_neon, axpy_neon};
  return table;
}

}  // namespace xsng::simd

#endif  // __aarch64__
