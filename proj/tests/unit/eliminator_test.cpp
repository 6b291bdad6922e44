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

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "xsng/eliminator.hpp"
#include "xsng/error.hpp"
#include "xsng/grad_check.hpp"
#include "xsng/ops.hpp"
#include "xsng/rng.hpp"

namespace xsng {
namespace {

Tensor random_tensor(Shape shape, std::uint64_t key, double sd = 1.0) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest);
  return Tensor::randn(std::move(shape), rng, sd);
}

TEST(GrlConfig, ValidationAndRamp) {
  GrlConfig g;
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.lambda_at(0), 1.0);
  EXPECT_EQ(g.lambda_at(123456), 1.0);
  g.ramp = true;
  EXPECT_EQ(g.lambda_at(0), 0.0);
  EXPECT_EQ(g.lambda_at(500), 0.5);
  EXPECT_EQ(g.lambda_at(1000), 1.0);
  EXPECT_EQ(g.lambda_at(5000), 1.0);
  g.ramp_start = 1000;
  EXPECT_THROW(g.validate(), ConfigError);
  g = GrlConfig{};
  g.lambda = -0.1;
  EXPECT_THROW(g.validate(), ConfigError);
  g = GrlConfig{};
  g.classifier_lr_scale = 0.0;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Grl, ForwardBitIdentityForManyShapes) {
  CounterRng rng = CounterRng::derive(1, rng_stream::kTest);
  for (const Shape& s : {Shape{1}, Shape{7}, Shape{3, 5}, Shape{2, 3, 4}}) {
    Tape tape;
    const Tensor x = Tensor::randn(s, rng, 100.0);
    EXPECT_EQ(grl(tape.leaf(x), 0.5).value(), x);
  }
}

// Composite loss through a GRL versus the same graph without it.
TEST(Grl, TwinGraphGradientIsScaledByMinusLambda) {
  const Tensor x0 = random_tensor({4, 3}, 2), w = random_tensor({3, 5}, 3);
  auto graph = [&](Tape& tape, Var x, std::optional<double> lambda) {
    const Var h = lambda ? grl(x, *lambda) : x;
    return sum(square(relu(matmul(h, tape.constant(w)))));
  };
  for (const double lambda : {0.0, 0.5, 1.0}) {
    Tape a, b;
    const Var xa = a.leaf(x0), xb = b.leaf(x0);
    const Tensor with = a.backward(graph(a, xa, lambda))[xa];
    const Tensor without = b.backward(graph(b, xb, std::nullopt))[xb];
    for (std::size_t i = 0; i < with.size(); ++i) EXPECT_NEAR(with[i], -lambda * without[i], 1e-10);
  }
}

TEST(Classifier, ParameterNamesAndShapes) {
  const ParamStore p = init_classifier_params(8, 3, 3, 1);
  EXPECT_EQ(p.size(), 7u);
  EXPECT_EQ(p.at("eliminator.conv1.w").shape(), (Shape{8, 8, 3}));
  EXPECT_EQ(p.at("eliminator.conv3.b").shape(), (Shape{8}));
  EXPECT_EQ(p.at("eliminator.out.w").shape(), (Shape{8, 3}));
  EXPECT_THROW(init_classifier_params(8, 3, 2, 1), ConfigError);
}

TEST(Classifier, ZeroOutputLayerGivesUniform) {
  ParamStore store = init_classifier_params(6, 4, 3, 2);
  store.at("eliminator.out.w").fill(0.0);
  Tape tape;
  const ParamBinding p(tape, store);
  const Tensor probs = classify_singer(tape.constant(random_tensor({5, 6}, 4)), p, 1.0).value();
  for (const double v : probs.vec()) EXPECT_EQ(v, 0.25);
}

TEST(Classifier, ZeroConvWeightsGiveZeroEmbeddingAndUniform) {
  ParamStore store = init_classifier_params(6, 3, 3, 3);
  for (const char* n : {"eliminator.conv1.w", "eliminator.conv2.w", "eliminator.conv3.w"}) store.at(n).fill(0.0);
  Tape tape;
  const ParamBinding p(tape, store);
  const Var x = tape.constant(random_tensor({1, 6}, 5));
  EXPECT_EQ(singer_embedding(x, p, 1.0).value(), Tensor({1, 6}, 0.0));
  for (const double v : classify_singer(x, p, 1.0).value().vec()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

// Conv, ReLU, pooling and softmax written as plain loops.
TEST(Classifier, MatchesStageByStageOracle) {
  const std::size_t d = 5, t = 6, s = 3;
  ParamStore store = init_classifier_params(d, s, 3, 4);
  std::uint64_t key = 60;
  for (const char* n : {"eliminator.conv1.b", "eliminator.conv2.b", "eliminator.conv3.b"}) {
    store.at(n) = random_tensor({d}, key++, 0.3);
  }
  const Tensor x = random_tensor({t, d}, 7);
  std::vector<double> h(x.vec());
  for (const char* layer : {"eliminator.conv1", "eliminator.conv2", "eliminator.conv3"}) {
    const Tensor& w = store.at(std::string(layer) + ".w");
    const Tensor& b = store.at(std::string(layer) + ".b");
    std::vector<double> next(t * d, 0.0);
    for (std::size_t step = 0; step < t; ++step) {
      for (std::size_t o = 0; o < d; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t k = 0; k < 3; ++k) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(step + k) - 1;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
            acc += h[static_cast<std::size_t>(src) * d + i] * w[(o * d + i) * 3 + k];
          }
        }
        next[step * d + o] = std::max(acc, 0.0);
      }
    }
    h = next;
  }
  std::vector<double> pooled(d, 0.0);
  for (std::size_t step = 0; step < t; ++step) {
    for (std::size_t j = 0; j < d; ++j) pooled[j] += h[step * d + j] / static_cast<double>(t);
  }
  const Tensor& wo = store.at("eliminator.out.w");
  std::vector<double> logits(s, 0.0);
  for (std::size_t c = 0; c < s; ++c) {
    for (std::size_t j = 0; j < d; ++j) logits[c] += pooled[j] * wo.at(j, c);
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (const double l : logits) z += std::exp(l - m);

  Tape tape;
  const ParamBinding p(tape, store);
  const Tensor probs = classify_singer(tape.constant(x), p, std::nullopt).value();
  double total = 0.0;
  for (std::size_t c = 0; c < s; ++c) {
    EXPECT_NEAR(probs[c], std::exp(logits[c] - m) / z, 1e-12);
    total += probs[c];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ClassifierProperty, PermutingOutputColumnsPermutesProbabilities) {
  CounterRng rng = CounterRng::derive(8, rng_stream::kTest);
  const std::size_t d = 6, s = 4;
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore store = init_classifier_params(d, s, 3, 100 + trial);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    rng.shuffle(std::span<std::size_t>(perm));
    ParamStore permuted = store;
    Tensor& w = permuted.at("eliminator.out.w");
    const Tensor& orig = store.at("eliminator.out.w");
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t c = 0; c < s; ++c) w.at(j, c) = orig.at(j, perm[c]);
    }
    const Tensor x = Tensor::randn({5, d}, rng);
    Tape tape;
    const ParamBinding a(tape, store), b(tape, permuted);
    const Tensor pa = classify_singer(tape.constant(x), a, 1.0).value();
    const Tensor pb = classify_singer(tape.constant(x), b, 1.0).value();
    for (std::size_t c = 0; c < s; ++c) EXPECT_NEAR(pb[c], pa[perm[c]], 1e-15);
  }
}

TEST(Classifier, GradientThroughReversalMatchesFiniteDifferences) {
  const ParamStore store = init_classifier_params(4, 3, 3, 9);
  auto f = [&](Tape& tape, Var x) {
    const ParamBinding p(tape, store);
    return singer_loss(classify_singer(x, p, std::nullopt), 2);
  };
  EXPECT_LT(grad_check(f, random_tensor({5, 4}, 10), 1e-5).max_relative_error, 1e-4);
}

TEST(SingerLoss, PerfectPredictionIsZero) {
  Tape tape;
  EXPECT_EQ(singer_loss(tape.constant(Tensor::vector({0, 1, 0})), 1).value().item(), 0.0);
}

TEST(SingerLoss, UniformOverFourIsLogFour) {
  Tape tape;
  const double loss = singer_loss(tape.constant(Tensor({4}, 0.25)), 3).value().item();
  EXPECT_NEAR(loss, std::log(4.0), 1e-12);
  EXPECT_NEAR(loss, 1.3863, 1e-4);
}

TEST(SingerLoss, BatchAveragesPerSampleLosses) {
  Tape tape;
  const Var probs[] = {tape.constant(Tensor::vector({1, 0, 0, 0})), tape.constant(Tensor({4}, 0.25)),
                       tape.constant(Tensor::vector({0.5, 0.5, 0, 0}))};
  const int labels[] = {0, 2, 1};
  const double loss = singer_loss(probs, labels).value().item();
  EXPECT_NEAR(loss, (0.0 + std::log(4.0) + std::log(2.0)) / 3.0, 1e-12);
  EXPECT_NEAR(loss, 0.6931, 1e-4);
}

TEST(SingerLoss, ZeroProbabilityIsClampedAndFlagged) {
  Tape tape;
  const Var p = tape.leaf(Tensor::vector({1, 0, 0}));
  bool clamped = false;
  const Var loss = singer_loss(p, 1, &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_NEAR(loss.value().item(), -std::log(1e-12), 1e-9);
  EXPECT_EQ(tape.backward(loss)[p], Tensor({3}, 0.0));
  bool batch_clamped = false;
  const Var ps[] = {tape.constant(Tensor({3}, 1.0 / 3.0)), p};
  const int labels[] = {0, 2};
  singer_loss(ps, labels, &batch_clamped);
  EXPECT_TRUE(batch_clamped);
}

TEST(SingerLoss, SingerIdsAreZeroBased) {
  Tape tape;
  const Var p = tape.constant(Tensor({3}, 1.0 / 3.0));
  EXPECT_NO_THROW(singer_loss(p, 0));
  EXPECT_THROW(singer_loss(p, 3), LookupError);
  EXPECT_THROW(singer_loss(p, -1), LookupError);
  const Var ps[] = {p};
  const int labels[] = {0, 1};
  EXPECT_THROW(singer_loss(ps, labels), ContractError);
}

TEST(SingerLossProperty, NonNegativeAndZeroOnlyAtCertainty) {
  CounterRng rng = CounterRng::derive(11, rng_stream::kTest);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = static_cast<std::size_t>(rng.uniform_int(2, 6));
    Tape tape;
    const Tensor probs = softmax(tape.constant(Tensor::randn({s}, rng, 3.0))).value();
    const int label = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(s) - 1));
    const double loss = singer_loss(tape.constant(probs), label).value().item();
    EXPECT_GE(loss, 0.0);
    if (probs[static_cast<std::size_t>(label)] < 1.0) EXPECT_GT(loss, 0.0);
  }
}

}  // namespace
}  // namespace xsng
