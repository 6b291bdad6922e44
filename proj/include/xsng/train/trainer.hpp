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
#include <optional>
#include <string>
#include <vector>

#include "xsng/train/config.hpp"
#include "xsng/train/corpus.hpp"
#include "xsng/train/optim.hpp"

namespace xsng {

/// Everything that changes during training.
struct TrainState {
  ParamStore generator;      // "gen.*" and "eliminator.*"
  ParamStore discriminator;  // "disc.*"
  AdamState opt_g;
  AdamState opt_d;
  std::int64_t step = 0;            // completed steps
  std::int64_t epoch = 0;           // epoch the next step belongs to
  std::int64_t batch_in_epoch = 0;  // next batch within that epoch
  std::int64_t warmup_end_epoch = -1;  // -1 until warmup has finished

  bool operator==(const TrainState&) const = default;
};

/// Fresh parameters and zeroed optimizer moments.
TrainState init_train_state(const TrainConfig& config);

struct StepMetrics {
  std::int64_t step = 0;  // 1-based index of the step just taken
  std::int64_t epoch = 0;
  double lr = 0.0;
  double acoustic = 0.0;
  double mel_l1 = 0.0;
  double duration_mse = 0.0;
  std::optional<double> adversarial;
  std::optional<double> feature_match;
  std::optional<double> singer;
  std::optional<double> d_loss;
  bool singer_clamped = false;
  std::optional<double> probe_acc;

  bool operator==(const StepMetrics&) const = default;
};

/// One JSON object, no trailing newline. Terms that were not computed are
/// written as null.
std::string metrics_to_json(const StepMetrics& m);

class Trainer {
 public:
  Trainer(TrainConfig config, UnifiedLexicon lexicon);
  Trainer(TrainConfig config, UnifiedLexicon lexicon, TrainState state);

  /// One discriminator update followed by one generator update on the next
  /// batch. Throws NumericError with a JSON dump of the step on divergence
  /// (a loss above 1e6 or non-finite); the state is left as before the step.
  StepMetrics step();

  bool finished() const;

  /// Steps until finished() or `max_steps` more steps (negative: no
  /// limit). `on_step` sees every step; `on_epoch_end` runs after the last
  /// step of each epoch. Probe accuracy is attached to the last step of an
  /// epoch when probe_every_epochs divides the epoch count.
  void run(const std::function<void(const StepMetrics&)>& on_step, std::int64_t max_steps = -1,
           const std::function<void(const Trainer&)>& on_epoch_end = {});

  std::size_t batches_per_epoch() const;
  /// Item indices of one batch in one epoch.
  std::vector<std::size_t> batch_items(std::int64_t epoch, std::int64_t batch) const;

  const TrainState& state() const noexcept { return state_; }
  const TrainConfig& config() const noexcept { return config_; }
  const SyntheticCorpus& corpus() const noexcept { return corpus_; }
  const UnifiedLexicon& lexicon() const noexcept { return lexicon_; }

 private:
  double probe_now();

  TrainConfig config_;
  UnifiedLexicon lexicon_;
  SyntheticCorpus corpus_;
  TrainState state_;
  std::optional<SyntheticCorpus> probe_corpus_;
};

}  // namespace xsng
