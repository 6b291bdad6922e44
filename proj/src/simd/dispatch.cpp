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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsng/simd/kernels.hpp"

namespace xsng::simd {
namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
  if (const char* env = std::getenv("XSNG_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
    if (want == "avx2" && cpu_has_avx2()) return &avx2_kernels();
#endif
#if defined(__aarch64__)
    if (want == "neon") return &neon_kernels();
#endif
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return &avx2_kernels();
#endif
#if defined(__aarch64__)
  return &neon_kernels();
#endif
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

// Packing buffer for B^T; one per thread so concurrent tapes never share it.
std::vector<double>& pack_buffer() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (cpu_has_avx2()) out.push_back(Isa::Avx2);
#if defined(__aarch64__)
  out.push_back(Isa::Neon);
#endif
  return out;
}

bool isa_available(Isa isa) {
  for (Isa i : available_isas()) {
    if (i == isa) return true;
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernel ISA not available on this CPU: " +
                                std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2_kernels();
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon_kernels();
#endif
    default: return scalar_kernels();
  }
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) {
  active_slot().store(&table_for(isa), std::memory_order_release);
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double* a, const double* b, double* c,
          bool accumulate) {
  const KernelTable& kt = active();
  const std::size_t a_rs = trans_a ? 1 : k;
  const std::size_t a_cs = trans_a ? m : 1;
  if (!trans_b) {
    kt.gemm(m, n, k, a, a_rs, a_cs, b, c, accumulate);
    return;
  }
  // B is stored n x k; pack it to k x n so the kernel streams rows.
  std::vector<double>& packed = pack_buffer();
  packed.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) packed[p * n + j] = b[j * k + p];
  }
  kt.gemm(m, n, k, a, a_rs, a_cs, packed.data(), c, accumulate);
}

}  // namespace xsng::simd
