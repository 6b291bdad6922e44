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

// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// checked the CPU feature bits.

#include "xsng/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace xsng::simd {
namespace {

// 4 x 8 register tile: eight ymm accumulators, two B loads and four
// broadcasts per step of p.
inline void tile_4x8(std::size_t k, const double* a, std::size_t a_rs,
                     std::size_t a_cs, const double* b, std::size_t n,
                     double* c, bool accumulate) {
  __m256d c00, c01, c10, c11, c20, c21, c30, c31;
  if (accumulate) {
    c00 = _mm256_loadu_pd(c + 0 * n);
    c01 = _mm256_loadu_pd(c + 0 * n + 4);
    c10 = _mm256_loadu_pd(c + 1 * n);
    c11 = _mm256_loadu_pd(c + 1 * n + 4);
    c20 = _mm256_loadu_pd(c + 2 * n);
    c21 = _mm256_loadu_pd(c + 2 * n + 4);
    c30 = _mm256_loadu_pd(c + 3 * n);
    c31 = _mm256_loadu_pd(c + 3 * n + 4);
  } else {
    c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * n);
    const __m256d b1 = _mm256_loadu_pd(b + p * n + 4);
    const double* ap = a + p * a_cs;
    __m256d av = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(ap + a_rs);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(ap + 2 * a_rs);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(ap + 3 * a_rs);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c + 0 * n, c00);
  _mm256_storeu_pd(c + 0 * n + 4, c01);
  _mm256_storeu_pd(c + 1 * n, c10);
  _mm256_storeu_pd(c + 1 * n + 4, c11);
  _mm256_storeu_pd(c + 2 * n, c20);
  _mm256_storeu_pd(c + 2 * n + 4, c21);
  _mm256_storeu_pd(c + 3 * n, c30);
  _mm256_storeu_pd(c + 3 * n + 4, c31);
}

// One row of A against a column strip of width 4.
inline void tile_1x4(std::size_t k, const double* a, std::size_t a_cs,
                     const double* b, std::size_t n, double* c,
                     bool accumulate) {
  __m256d acc = accumulate ? _mm256_loadu_pd(c) : _mm256_setzero_pd();
  for (std::size_t p = 0; p < k; ++p) {
    acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p * a_cs),
                          _mm256_loadu_pd(b + p * n), acc);
  }
  _mm256_storeu_pd(c, acc);
}

inline void tile_1x1(std::size_t k, const double* a, std::size_t a_cs,
                     const double* b, std::size_t n, double* c,
                     bool accumulate) {
  double acc = accumulate ? *c : 0.0;
  for (std::size_t p = 0; p < k; ++p) acc = std::fma(a[p * a_cs], b[p * n], acc);
  *c = acc;
}

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_rs, std::size_t a_cs, const double* b, double* c,
               bool accumulate) {
  const std::size_t m4 = m - m % 4;
  const std::size_t n8 = n - n % 8;
  std::size_t i = 0;
  for (; i < m4; i += 4) {
    const double* ai = a + i * a_rs;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j < n8; j += 8) tile_4x8(k, ai, a_rs, a_cs, b + j, n, ci + j, accumulate);
    for (std::size_t r = 0; r < 4; ++r) {
      std::size_t jj = j;
      for (; jj + 4 <= n; jj += 4) {
        tile_1x4(k, ai + r * a_rs, a_cs, b + jj, n, ci + r * n + jj, accumulate);
      }
      for (; jj < n; ++jj) {
        tile_1x1(k, ai + r * a_rs, a_cs, b + jj, n, ci + r * n + jj, accumulate);
      }
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * a_rs;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) tile_1x4(k, ai, a_cs, b + j, n, ci + j, accumulate);
    for (; j < n; ++j) tile_1x1(k, ai, a_cs, b + j, n, ci + j, accumulate);
  }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  }
  const __m256d s = _mm256_add_pd(s0, s1);
  const __m128d lo = _mm256_castpd256_pd128(s);
  const __m128d hi = _mm256_extractf128_pd(s, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double total = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) total = std::fma(x[i], y[i], total);
  return total;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2, gemm_avx2, dot_avx2, axpy_avx2};
  return table;
}

}  // namespace xsng::simd
