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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "xsng/params.hpp"

namespace xsng {

/// Gradient reversal strength. With `ramp` set, lambda grows linearly from
/// 0 at ramp_start to its full value at ramp_end.
struct GrlConfig {
  double lambda = 1.0;
  bool ramp = false;
  std::int64_t ramp_start = 0;
  std::int64_t ramp_end = 1000;
  /// Learning-rate factor for the classifier ("eliminator.*") relative to
  /// the rest of the generator.
  double classifier_lr_scale = 1.0;

  /// Throws ConfigError for lambda < 0, ramp_start >= ramp_end or a
  /// non-positive classifier_lr_scale.
  void validate() const;
  double lambda_at(std::int64_t step) const;
  bool operator==(const GrlConfig&) const = default;
};

/// Singer classifier: three same-padded conv+ReLU layers (d -> d), mean
/// over time, then a bias-free linear layer d -> S. Names are
/// "<prefix>.conv{1,2,3}.{w,b}" and "<prefix>.out.w".
ParamStore init_classifier_params(std::size_t hidden_dim, std::size_t singer_count,
                                  std::size_t kernel, std::uint64_t seed,
                                  const std::string& prefix = "eliminator");

/// Pooled singer embedding e^s, [1 x d]. With a lambda the input first
/// passes a gradient reversal layer; nullopt skips it (plain classifier).
Var singer_embedding(Var encoder_out, const ParamBinding& p, std::optional<double> lambda,
                     const std::string& prefix = "eliminator");

/// Singer probabilities [S] = softmax(W^T e^s).
Var classify_singer(Var encoder_out, const ParamBinding& p, std::optional<double> lambda,
                    const std::string& prefix = "eliminator");

/// -log P(true_singer) with the probability floored at 1e-12; `clamped`
/// reports whether the floor was hit. Singer ids are 0-based. Throws
/// LookupError for an id outside [0, S).
Var singer_loss(Var probabilities, int true_singer, bool* clamped = nullptr);

/// Batch form: mean of the per-sample losses.
Var singer_loss(std::span<const Var> probabilities, std::span<const int> true_singers,
                bool* clamped = nullptr);

}  // namespace xsng
