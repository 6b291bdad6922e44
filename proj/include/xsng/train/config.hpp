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
#include <filesystem>
#include <string>

#include "xsng/discriminators.hpp"
#include "xsng/eliminator.hpp"
#include "xsng/generator.hpp"
#include "xsng/train/optim.hpp"

namespace xsng {

struct CorpusConfig {
  std::size_t items = 60;
  int min_phonemes = 4;
  int max_phonemes = 12;
  /// Draw lyrics only from pronunciations every lexicon shares, so the
  /// phoneme stream carries no trace of the language.
  bool shared_syllables = true;
  int min_pitch = 55;
  int max_pitch = 72;
  double noise = 0.01;
  std::uint64_t render_seed = 7;

  void validate() const;
  bool operator==(const CorpusConfig&) const = default;
};

struct ProbeConfig {
  std::size_t items = 150;
  std::size_t steps = 500;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  /// Every item whose index mod 10 is below holdout_tenths is held out.
  int holdout_tenths = 3;

  void validate() const;
  bool operator==(const ProbeConfig&) const = default;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  LossWeights weights;
  bool use_eliminator = true;
  GrlConfig grl;
  LrSchedule schedule;
  AdamConfig adam;
  std::size_t batch_size = 8;
  /// Training stops after `epochs` epochs or `max_steps` steps, whichever
  /// comes first; max_steps = 0 means no step limit.
  std::int64_t epochs = 1;
  std::int64_t max_steps = 0;
  /// Checkpoint every k epochs during `xsng train` (0: only at the end).
  std::int64_t checkpoint_every_epochs = 0;
  /// Run the probe at every k-th epoch end and log its accuracy (0: never).
  std::int64_t probe_every_epochs = 0;
  std::uint64_t probe_corpus_seed = 1001;
  CorpusConfig corpus;
  ProbeConfig probe;
  /// Directory with zh.tsv / ja.tsv / en.tsv; empty means the shipped set.
  std::string lexicon_dir;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Directory of the shipped lexicons (compile-time data path).
std::filesystem::path default_lexicon_dir();
std::filesystem::path lexicon_dir_of(const TrainConfig& config);

/// JSON text with every field. Keys are sorted, doubles round-trip.
std::string config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys or wrong types throw
/// ConfigError. The result is validated.
TrainConfig config_from_json(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace xsng
