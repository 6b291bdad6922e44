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

#include "xsng/train/optim.hpp"

#include <cmath>

#include "xsng/error.hpp"

namespace xsng {

void LrSchedule::validate() const {
  if (!(warmup_start > 0.0 && warmup_start < peak)) throw ConfigError("schedule: need 0 < warmup_start < peak");
  if (warmup_steps < 1) throw ConfigError("schedule: warmup_steps must be >= 1");
  if (!(epoch_decay > 0.0 && epoch_decay <= 1.0)) throw ConfigError("schedule: epoch_decay must be in (0, 1]");
}

double lr_at(std::int64_t step, std::int64_t epoch, const LrSchedule& s, std::int64_t warmup_end_epoch) {
  if (step < 0 || epoch < 0) throw ContractError("lr_at: step and epoch must be >= 0");
  if (step < s.warmup_steps) {
    const double t = static_cast<double>(step) / static_cast<double>(s.warmup_steps);
    return s.warmup_start + (s.peak - s.warmup_start) * t;
  }
  double lr = s.peak;
  for (std::int64_t e = warmup_end_epoch; e < epoch; ++e) lr *= s.epoch_decay;
  return lr;
}

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam: betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be > 0");
}

AdamState make_adam_state(const ParamStore& params) {
  AdamState s;
  for (const auto& [name, value] : params) {
    s.m.add(name, Tensor(value.shape()));
    s.v.add(name, Tensor(value.shape()));
  }
  return s;
}

void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state, double lr,
               const AdamConfig& c) {
  adam_step(params, grads, state, lr, c, {});
}

void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state, double lr,
               const AdamConfig& c, const LrMultiplier& multiplier) {
  for (const auto& [name, g] : grads) {
    if (g.shape() != params.at(name).shape()) {
      throw DimensionError("adam: gradient for '" + name + "' has shape " + to_string(g.shape()));
    }
    if (!g.all_finite()) throw NumericError("adam: non-finite gradient for '" + name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    const double step_lr = multiplier ? lr * multiplier(name) : lr;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      p[i] -= step_lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace xsng
