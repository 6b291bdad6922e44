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
#include <vector>

#include "xsng/generator.hpp"
#include "xsng/train/config.hpp"
#include "xsng/train/corpus.hpp"

namespace xsng {

struct ProbeResult {
  double accuracy = 0.0;
  std::size_t held_out = 0;
  double final_loss = 0.0;  // training loss of the last probe step
};

/// Encoder outputs of a frozen generator, one per corpus item.
std::vector<Tensor> encoder_features(const ParamStore& generator, const GeneratorConfig& config,
                                     const SyntheticCorpus& corpus);

/// Trains a fresh singer classifier (the eliminator's topology, no
/// gradient reversal) on frozen encoder outputs and reports its accuracy
/// on the held-out items.
ProbeResult probe_eval(const ParamStore& generator, const GeneratorConfig& config,
                       const SyntheticCorpus& corpus, const ProbeConfig& probe, std::uint64_t seed);

}  // namespace xsng
