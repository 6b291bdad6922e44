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

#include "xsng/train/probe.hpp"

#include <algorithm>

#include "xsng/eliminator.hpp"
#include "xsng/error.hpp"
#include "xsng/ops.hpp"
#include "xsng/train/optim.hpp"

namespace xsng {

std::vector<Tensor> encoder_features(const ParamStore& generator, const GeneratorConfig& config,
                                     const SyntheticCorpus& corpus) {
  std::vector<Tensor> out;
  out.reserve(corpus.items.size());
  for (const CorpusItem& item : corpus.items) {
    Tape tape;
    const ParamBinding p(tape, generator, false);
    const GeneratorOutput g = generator_forward(item.seq, item.language_id, item.singer_id, p, config, Mode::Train,
                                                std::span<const int>(item.seq.note_durations));
    out.push_back(g.encoder_out.value());
  }
  return out;
}

ProbeResult probe_eval(const ParamStore& generator, const GeneratorConfig& config,
                       const SyntheticCorpus& corpus, const ProbeConfig& probe, std::uint64_t seed) {
  probe.validate();
  const std::vector<Tensor> features = encoder_features(generator, config, corpus);
  std::vector<std::size_t> train, held_out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    (static_cast<int>(i % 10) < probe.holdout_tenths ? held_out : train).push_back(i);
  }
  if (train.empty() || held_out.empty()) throw ConfigError("probe: corpus too small to hold items out");

  ParamStore params = init_classifier_params(config.hidden_dim, config.singer_count, 3, seed, "probe");
  AdamState state = make_adam_state(params);
  const AdamConfig adam;
  CounterRng rng = CounterRng::derive(seed, rng_stream::kProbe, 0);
  ProbeResult result;
  for (std::size_t s = 0; s < probe.steps; ++s) {
    Tape tape;
    const ParamBinding p(tape, params);
    std::vector<Var> probs;
    std::vector<int> labels;
    for (std::size_t b = 0; b < probe.batch_size; ++b) {
      const std::size_t i = train[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(train.size()) - 1))];
      probs.push_back(classify_singer(tape.constant(features[i]), p, std::nullopt, "probe"));
      labels.push_back(corpus.items[i].singer_id);
    }
    const Var loss = singer_loss(probs, labels);
    result.final_loss = loss.value().item();
    adam_step(params, p.gradients(tape.backward(loss)), state, probe.lr, adam);
  }

  std::size_t correct = 0;
  for (const std::size_t i : held_out) {
    Tape tape;
    const ParamBinding p(tape, params, false);
    const Tensor probs = classify_singer(tape.constant(features[i]), p, std::nullopt, "probe").value();
    const auto best = std::max_element(probs.data().begin(), probs.data().end()) - probs.data().begin();
    if (best == corpus.items[i].singer_id) ++correct;
  }
  result.held_out = held_out.size();
  result.accuracy = static_cast<double>(correct) / static_cast<double>(held_out.size());
  return result;
}

}  // namespace xsng
