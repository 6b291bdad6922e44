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

// Dense double-precision inner loops with a portable scalar reference and
// ISA-specific variants. The active table is picked once at startup from the
// CPU feature bits, and can be pinned with XSNG_KERNELS=scalar|avx2|neon or
// set_active_isa() (tests use the latter to compare variants).

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace xsng::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Row-major GEMM over an A operand addressed by explicit strides:
///   C[i, j] (+)= sum_p A(i, p) * B[p, j],  A(i, p) = a[i * a_rs + p * a_cs].
/// B is a dense k x n row-major block, C a dense m x n row-major block.
/// When `accumulate` is false C is overwritten.
using GemmFn = void (*)(std::size_t m, std::size_t n, std::size_t k,
                        const double* a, std::size_t a_rs, std::size_t a_cs,
                        const double* b, double* c, bool accumulate);
using DotFn = double (*)(const double* x, const double* y, std::size_t n);
/// y += alpha * x
using AxpyFn = void (*)(double alpha, const double* x, double* y,
                        std::size_t n);

struct KernelTable {
  Isa isa;
  GemmFn gemm;
  DotFn dot;
  AxpyFn axpy;
};

const KernelTable& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels();
#endif

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();
bool isa_available(Isa isa);

/// The table every tensor op routes through.
const KernelTable& active();
/// Throws std::invalid_argument if the ISA is not available here.
void set_active_isa(Isa isa);
const KernelTable& table_for(Isa isa);

/// C = op(A) * op(B) for dense row-major operands. Shapes are those of the
/// un-transposed storage: A is m x k (k x m when trans_a), B is k x n
/// (n x k when trans_b).
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double* a, const double* b, double* c,
          bool accumulate);

}  // namespace xsng::simd
