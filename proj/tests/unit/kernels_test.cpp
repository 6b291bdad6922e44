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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "xsng/ops.hpp"
#include "xsng/rng.hpp"
#include "xsng/simd/kernels.hpp"

namespace xsng::simd {
namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t key) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

// Restores the default table when a test pins one.
class PinnedIsa {
 public:
  explicit PinnedIsa(Isa isa) : saved_(active().isa) { set_active_isa(isa); }
  ~PinnedIsa() { set_active_isa(saved_); }

 private:
  Isa saved_;
};

class KernelEquivalence : public ::testing::TestWithParam<Isa> {
 protected:
  void SetUp() override {
    if (!isa_available(GetParam())) GTEST_SKIP() << isa_name(GetParam()) << " not available on this machine";
  }
};

TEST_P(KernelEquivalence, DotMatchesScalar) {
  const KernelTable& ref = scalar_kernels();
  const KernelTable& k = table_for(GetParam());
  for (const std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 257u}) {
    const auto x = random_vec(n, 1 + n), y = random_vec(n, 1000 + n);
    EXPECT_LT(rel_diff(k.dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)), 1e-13) << "n=" << n;
  }
}

TEST_P(KernelEquivalence, AxpyMatchesScalar) {
  const KernelTable& ref = scalar_kernels();
  const KernelTable& k = table_for(GetParam());
  for (const std::size_t n : {1u, 5u, 8u, 13u, 64u, 99u}) {
    const auto x = random_vec(n, 2 + n);
    auto y1 = random_vec(n, 3000 + n);
    auto y2 = y1;
    ref.axpy(-0.7, x.data(), y1.data(), n);
    k.axpy(-0.7, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(rel_diff(y1[i], y2[i]), 1e-14) << "n=" << n << " i=" << i;
  }
}

TEST_P(KernelEquivalence, StridedGemmMatchesScalar) {
  const KernelTable& ref = scalar_kernels();
  const KernelTable& k = table_for(GetParam());
  struct Case {
    std::size_t m, n, k;
    bool transposed_a;
    bool accumulate;
  };
  const Case cases[] = {{1, 1, 1, false, false}, {3, 5, 7, false, false},  {4, 8, 4, true, false},
                        {9, 13, 6, false, true}, {16, 64, 64, true, true}, {7, 3, 17, true, false}};
  for (const Case& c : cases) {
    const auto a = random_vec(c.m * c.k, 10 + c.m), b = random_vec(c.k * c.n, 20 + c.n);
    const std::size_t rs = c.transposed_a ? 1 : c.k, cs = c.transposed_a ? c.m : 1;
    auto c1 = random_vec(c.m * c.n, 30 + c.k);
    auto c2 = c1;
    ref.gemm(c.m, c.n, c.k, a.data(), rs, cs, b.data(), c1.data(), c.accumulate);
    k.gemm(c.m, c.n, c.k, a.data(), rs, cs, b.data(), c2.data(), c.accumulate);
    for (std::size_t i = 0; i < c1.size(); ++i) {
      EXPECT_LT(rel_diff(c1[i], c2[i]), 1e-13) << c.m << "x" << c.n << "x" << c.k << " i=" << i;
    }
  }
}

TEST_P(KernelEquivalence, WholeOpsAgreeAcrossIsas) {
  CounterRng rng = CounterRng::derive(40, rng_stream::kTest);
  const Tensor a = Tensor::randn({12, 20}, rng), b = Tensor::randn({20, 9}, rng);
  const Tensor x = Tensor::randn({11, 6}, rng), w = Tensor::randn({5, 6, 3}, rng);
  auto run = [&] {
    Tape tape;
    const Var va = tape.leaf(a), vb = tape.leaf(b), vx = tape.leaf(x), vw = tape.leaf(w);
    const Var loss = add(sum(square(matmul(va, vb))), sum(square(conv1d_time_major(vx, vw, Padding::Same))));
    const Gradients g = tape.backward(loss);
    return std::vector<Tensor>{loss.value(), g[va], g[vb], g[vx], g[vw]};
  };
  std::vector<Tensor> ref, got;
  {
    PinnedIsa pin(Isa::Scalar);
    ref = run();
  }
  {
    PinnedIsa pin(GetParam());
    got = run();
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < ref[i].size(); ++j) EXPECT_LT(rel_diff(ref[i][j], got[i][j]), 1e-12) << i << "/" << j;
  }
}

INSTANTIATE_TEST_SUITE_P(Isas, KernelEquivalence, ::testing::Values(Isa::Avx2, Isa::Neon),
                         [](const ::testing::TestParamInfo<Isa>& info) { return std::string(isa_name(info.param)); });

TEST(KernelDispatch, ScalarIsAlwaysAvailable) {
  EXPECT_TRUE(isa_available(Isa::Scalar));
  EXPECT_EQ(available_isas().front(), Isa::Scalar);
}

TEST(KernelDispatch, PinningAnUnavailableIsaThrows) {
  for (const Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!isa_available(isa)) EXPECT_THROW(set_active_isa(isa), std::invalid_argument);
  }
}

TEST(KernelDispatch, TransposedGemmHelper) {
  // C = A^T B^T with A 2x3 stored, B 4x2 stored: C is 3x4.
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{1, 0, 0, 1, 1, 1, 2, -1};
  std::vector<double> c(12);
  gemm(true, true, 3, 4, 2, a.data(), b.data(), c.data(), false);
  const std::vector<double> expect{1, 4, 5, -2, 2, 5, 7, -1, 3, 6, 9, 0};
  EXPECT_EQ(c, expect);
}

}  // namespace
}  // namespace xsng::simd
