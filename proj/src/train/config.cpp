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

#include "xsng/train/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "xsng/error.hpp"

namespace xsng {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeneratorConfig, hidden_dim, encoder_blocks,
                                                decoder_blocks, attention_heads, ffn_dim,
                                                conv_kernel, parallel_conv_branches, mel_bins,
                                                phoneme_vocab, pitch_vocab, duration_bucket_vocab,
                                                language_count, singer_count, epsilon, use_cln)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DiscriminatorConfig, channels, kernel, leaky_slope,
                                                band_count, segment_frames)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LossWeights, adversarial, feature_match, singer)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GrlConfig, lambda, ramp, ramp_start, ramp_end,
                                                classifier_lr_scale)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LrSchedule, warmup_start, peak, warmup_steps,
                                                epoch_decay)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AdamConfig, beta1, beta2, epsilon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CorpusConfig, items, min_phonemes, max_phonemes,
                                                shared_syllables, min_pitch, max_pitch, noise,
                                                render_seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProbeConfig, items, steps, batch_size, lr,
                                                holdout_tenths)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, seed, generator, discriminator, weights,
                                                use_eliminator, grl, schedule, adam, batch_size,
                                                epochs, max_steps, checkpoint_every_epochs,
                                                probe_every_epochs, probe_corpus_seed, corpus, probe,
                                                lexicon_dir)

namespace {

// Every key in `given` must exist in `known` (the serialized defaults).
void reject_unknown_keys(const nlohmann::json& given, const nlohmann::json& known, const std::string& path) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const auto it = known.find(key);
    if (it == known.end()) throw ConfigError("unknown config key '" + path + key + "'");
    if (it->is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + path + key + "' must be an object");
      reject_unknown_keys(value, *it, path + key + ".");
    }
  }
}

}  // namespace

void CorpusConfig::validate() const {
  if (items == 0) throw ConfigError("corpus: items must be >= 1");
  if (min_phonemes < 1 || min_phonemes > max_phonemes) {
    throw ConfigError("corpus: need 1 <= min_phonemes <= max_phonemes");
  }
  if (min_pitch < 0 || max_pitch > 127 || min_pitch > max_pitch) {
    throw ConfigError("corpus: pitch range must lie within 0..127");
  }
  if (!(noise >= 0.0)) throw ConfigError("corpus: noise must be >= 0");
}

void ProbeConfig::validate() const {
  if (items < 10 || steps == 0 || batch_size == 0) {
    throw ConfigError("probe: need items >= 10, steps >= 1, batch_size >= 1");
  }
  if (!(lr > 0.0)) throw ConfigError("probe: lr must be > 0");
  if (holdout_tenths < 1 || holdout_tenths > 9) throw ConfigError("probe: holdout_tenths must be in 1..9");
}

void TrainConfig::validate() const {
  generator.validate();
  discriminator.validate();
  grl.validate();
  schedule.validate();
  adam.validate();
  corpus.validate();
  probe.validate();
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 0 || max_steps < 0 || checkpoint_every_epochs < 0 || probe_every_epochs < 0) {
    throw ConfigError("train: epoch and step counts must be >= 0");
  }
  for (const double w : {weights.adversarial, weights.feature_match, weights.singer}) {
    if (!(w >= 0.0)) throw ConfigError("train: loss weights must be >= 0");
  }
  if (generator.singer_count < 2 || generator.language_count < 2) {
    throw ConfigError("train: need at least 2 singers and 2 languages");
  }
  if (generator.singer_count != generator.language_count) {
    throw ConfigError("train: every singer sings one language of its own, so singer_count (" +
                      std::to_string(generator.singer_count) + ") must equal language_count (" +
                      std::to_string(generator.language_count) + ")");
  }
  if (generator.language_count > static_cast<std::size_t>(kLanguageCount)) {
    throw ConfigError("train: at most " + std::to_string(kLanguageCount) + " languages are supported");
  }
}

std::filesystem::path default_lexicon_dir() {
  return std::filesystem::path(XSNG_DATA_DIR) / "lexicons";
}

std::filesystem::path lexicon_dir_of(const TrainConfig& config) {
  return config.lexicon_dir.empty() ? default_lexicon_dir() : std::filesystem::path(config.lexicon_dir);
}

std::string config_to_json(const TrainConfig& config) {
  return nlohmann::json(config).dump(2);
}

TrainConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j, nlohmann::json(TrainConfig{}), "");
  TrainConfig config;
  try {
    config = j.get<TrainConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
  }
  config.validate();
  return config;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace xsng
