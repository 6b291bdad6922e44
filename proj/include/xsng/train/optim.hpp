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
#include <functional>
#include <string_view>

#include "xsng/params.hpp"

namespace xsng {

/// Linear warmup from warmup_start to peak over warmup_steps, then a
/// per-epoch multiplicative decay.
struct LrSchedule {
  double warmup_start = 1e-4;
  double peak = 1e-2;
  std::int64_t warmup_steps = 5000;
  double epoch_decay = 0.99;

  /// Throws ConfigError unless warmup_start < peak, warmup_steps >= 1 and
  /// 0 < epoch_decay <= 1.
  void validate() const;
  bool operator==(const LrSchedule&) const = default;
};

/// Learning rate for `step` (0-based) in `epoch`. Past warmup the rate is
/// peak * epoch_decay^(epoch - warmup_end_epoch), where warmup_end_epoch is
/// the epoch in which warmup finished; the power is taken by repeated
/// multiplication so consecutive epochs differ by exactly one factor.
double lr_at(std::int64_t step, std::int64_t epoch, const LrSchedule& s,
             std::int64_t warmup_end_epoch = 0);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;

  void validate() const;
  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  ParamStore m;
  ParamStore v;
  std::int64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

/// Zero moments shaped like `params`.
AdamState make_adam_state(const ParamStore& params);

/// Bias-corrected Adam update of every parameter in `params` that has an
/// entry in `grads`. Throws NumericError naming the parameter when a
/// gradient is non-finite; nothing is modified in that case.
void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state, double lr,
               const AdamConfig& config);

/// Same update with a per-parameter learning-rate factor.
using LrMultiplier = std::function<double(std::string_view name)>;
void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state, double lr,
               const AdamConfig& config, const LrMultiplier& multiplier);

}  // namespace xsng
