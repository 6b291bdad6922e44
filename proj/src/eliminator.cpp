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

#include "xsng/eliminator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xsng/error.hpp"
#include "xsng/ops.hpp"
#include "xsng/rng.hpp"

namespace xsng {

void GrlConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("grl: lambda must be >= 0");
  if (ramp && ramp_start >= ramp_end) throw ConfigError("grl: ramp_start must be < ramp_end");
  if (!(classifier_lr_scale > 0.0)) throw ConfigError("grl: classifier_lr_scale must be > 0");
}

double GrlConfig::lambda_at(std::int64_t step) const {
  if (!ramp) return lambda;
  const double t = static_cast<double>(step - ramp_start) / static_cast<double>(ramp_end - ramp_start);
  return lambda * std::clamp(t, 0.0, 1.0);
}

ParamStore init_classifier_params(std::size_t d, std::size_t singer_count, std::size_t kernel,
                                  std::uint64_t seed, const std::string& prefix) {
  if (d == 0 || singer_count == 0 || kernel % 2 == 0) {
    throw ConfigError("classifier: need d >= 1, singer_count >= 1 and an odd kernel");
  }
  CounterRng rng = CounterRng::derive(seed, rng_stream::kInit, 1);
  ParamStore store;
  const double conv_std = 1.0 / std::sqrt(static_cast<double>(d * kernel));
  for (const char* layer : {"conv1", "conv2", "conv3"}) {
    store.add(prefix + "." + layer + ".w", Tensor::randn({d, d, kernel}, rng, conv_std));
    store.add(prefix + "." + layer + ".b", Tensor({d}));
  }
  store.add(prefix + ".out.w", Tensor::randn({d, singer_count}, rng, 1.0 / std::sqrt(static_cast<double>(d))));
  return store;
}

Var singer_embedding(Var encoder_out, const ParamBinding& p, std::optional<double> lambda,
                     const std::string& prefix) {
  Var x = lambda ? grl(encoder_out, *lambda) : encoder_out;
  for (const char* layer : {"conv1", "conv2", "conv3"}) {
    const std::string name = prefix + "." + layer;
    x = relu(add_row(conv1d_time_major(x, p[name + ".w"], Padding::Same), p[name + ".b"]));
  }
  const Var pooled = mean_rows(x);
  return reshape(pooled, {1, pooled.shape()[0]});
}

Var classify_singer(Var encoder_out, const ParamBinding& p, std::optional<double> lambda,
                    const std::string& prefix) {
  const Var logits = matmul(singer_embedding(encoder_out, p, lambda, prefix), p[prefix + ".out.w"]);
  return softmax(reshape(logits, {logits.shape()[1]}));
}

Var singer_loss(Var probabilities, int true_singer, bool* clamped) {
  if (true_singer < 0 || static_cast<std::size_t>(true_singer) >= probabilities.value().size()) {
    throw LookupError("singer id " + std::to_string(true_singer) + " outside [0, " +
                      std::to_string(probabilities.value().size()) + ")");
  }
  return neg_log_pick(probabilities, static_cast<std::size_t>(true_singer), 1e-12, clamped);
}

Var singer_loss(std::span<const Var> probabilities, std::span<const int> true_singers, bool* clamped) {
  if (probabilities.size() != true_singers.size()) {
    throw ContractError("singer_loss: " + std::to_string(probabilities.size()) + " predictions for " +
                        std::to_string(true_singers.size()) + " labels");
  }
  std::vector<Var> losses;
  losses.reserve(probabilities.size());
  bool any = false;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    bool hit = false;
    losses.push_back(singer_loss(probabilities[i], true_singers[i], &hit));
    any = any || hit;
  }
  if (clamped != nullptr) *clamped = any;
  return average(losses);
}

}  // namespace xsng
