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

#include "xsng/discriminators.hpp"

#include <cmath>

#include "xsng/error.hpp"
#include "xsng/ops.hpp"

namespace xsng {
namespace {

void require_scalar_finite(const Var& v, const char* term) {
  if (!v.value().all_finite()) throw NumericError(std::string("loss term ") + term + " is not finite");
}

}  // namespace

SubBandSplit SubBandSplit::equal(std::size_t bins, std::size_t band_count) {
  if (band_count == 0 || band_count > bins) {
    throw ConfigError("sub-band split: cannot cut " + std::to_string(bins) + " bins into " +
                      std::to_string(band_count) + " bands");
  }
  SubBandSplit split;
  const std::size_t base = bins / band_count, extra = bins % band_count;
  std::size_t lo = 0;
  for (std::size_t b = 0; b < band_count; ++b) {
    const std::size_t width = base + (b < extra ? 1 : 0);
    split.bands.emplace_back(lo, lo + width);
    lo += width;
  }
  return split;
}

void SubBandSplit::validate(std::size_t bins) const {
  if (bands.empty()) throw ConfigError("sub-band split: no bands");
  std::size_t expected = 0;
  for (const auto& [lo, hi] : bands) {
    if (lo != expected || hi <= lo) {
      throw ConfigError("sub-band split: band [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        ") breaks the partition at bin " + std::to_string(expected));
    }
    expected = hi;
  }
  if (expected != bins) {
    throw ConfigError("sub-band split: bands cover " + std::to_string(expected) + " of " +
                      std::to_string(bins) + " bins");
  }
}

std::vector<Var> split_subbands(Var mel, const SubBandSplit& split) {
  if (mel.shape().size() != 2) throw DimensionError("split_subbands: mel must be [F x B]");
  split.validate(mel.shape()[1]);
  std::vector<Var> out;
  out.reserve(split.bands.size());
  for (const auto& [lo, hi] : split.bands) out.push_back(slice_cols(mel, lo, hi));
  return out;
}

void DiscriminatorConfig::validate() const {
  if (channels == 0 || band_count == 0 || segment_frames == 0) {
    throw ConfigError("discriminator: channels, band_count and segment_frames must be >= 1");
  }
  if (kernel % 2 == 0) throw ConfigError("discriminator: kernel must be odd");
  if (!(leaky_slope >= 0.0)) throw ConfigError("discriminator: leaky_slope must be >= 0");
}

std::vector<std::string> discriminator_prefixes(const DiscriminatorConfig& config) {
  std::vector<std::string> out;
  for (std::size_t b = 0; b < config.band_count; ++b) out.push_back("disc.detail." + std::to_string(b));
  out.push_back("disc.segment");
  return out;
}

ParamStore init_discriminator_params(const DiscriminatorConfig& config, std::uint64_t seed) {
  config.validate();
  CounterRng rng = CounterRng::derive(seed, rng_stream::kInit, 2);
  const std::size_t c = config.channels, k = config.kernel;
  ParamStore store;
  for (const std::string& prefix : discriminator_prefixes(config)) {
    const std::size_t channels[] = {1, c, c, 1};
    for (std::size_t l = 0; l < 3; ++l) {
      const std::size_t fan_in = channels[l] * k * k;
      const std::string name = prefix + ".conv" + std::to_string(l + 1);
      store.add(name + ".w", Tensor::randn({channels[l + 1], channels[l], k, k}, rng,
                                           1.0 / std::sqrt(static_cast<double>(fan_in))));
      store.add(name + ".b", Tensor({channels[l + 1]}));
    }
  }
  return store;
}

CriticOutput disc_forward(Var x, const ParamBinding& p, const std::string& prefix,
                          const DiscriminatorConfig& config) {
  if (x.shape().size() != 2) throw DimensionError("disc_forward: input must be [F x B]");
  const std::size_t f = x.shape()[0], b = x.shape()[1];
  CriticOutput out;
  Var h = reshape(x, {1, f, b});
  for (int l = 1; l <= 3; ++l) {
    const std::string name = prefix + ".conv" + std::to_string(l);
    h = add_channel(conv2d(h, p[name + ".w"]), p[name + ".b"]);
    if (l < 3) h = leaky_relu(h, config.leaky_slope);
    out.features.push_back(h);
  }
  out.score = reshape(h, {f, b});
  return out;
}

SegmentCrop draw_segment_crop(std::size_t frames, std::size_t crop, CounterRng& rng) {
  if (frames <= crop) return {0, frames};
  const auto start = rng.uniform_int(0, static_cast<std::int64_t>(frames - crop));
  return {static_cast<std::size_t>(start), crop};
}

std::vector<CriticOutput> run_discriminators(Var mel, const ParamBinding& p,
                                             const DiscriminatorConfig& config,
                                             const SegmentCrop& crop) {
  const std::vector<std::string> prefixes = discriminator_prefixes(config);
  const std::vector<Var> bands = split_subbands(mel, SubBandSplit::equal(mel.shape()[1], config.band_count));
  std::vector<CriticOutput> out;
  out.reserve(prefixes.size());
  for (std::size_t b = 0; b < bands.size(); ++b) out.push_back(disc_forward(bands[b], p, prefixes[b], config));
  if (crop.start + crop.length > mel.shape()[0] || crop.length == 0) {
    throw ContractError("segment crop outside the mel");
  }
  const Var segment = crop.length == mel.shape()[0] ? mel : slice_rows(mel, crop.start, crop.start + crop.length);
  out.push_back(disc_forward(segment, p, prefixes.back(), config));
  return out;
}

std::vector<Var> scores_of(std::span<const CriticOutput> outputs) {
  std::vector<Var> out;
  out.reserve(outputs.size());
  for (const CriticOutput& o : outputs) out.push_back(o.score);
  return out;
}

Var lsgan_d_loss(std::span<const Var> real_scores, std::span<const Var> fake_scores) {
  if (real_scores.empty() || real_scores.size() != fake_scores.size()) {
    throw ContractError("lsgan_d_loss: need matching, non-empty score lists");
  }
  std::vector<Var> terms;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    const Var real = scale(mean(square(add_scalar(real_scores[i], -1.0))), 0.5);
    const Var fake = scale(mean(square(fake_scores[i])), 0.5);
    terms.push_back(add(real, fake));
  }
  return average(terms);
}

Var lsgan_g_loss(std::span<const Var> fake_scores) {
  if (fake_scores.empty()) throw ContractError("lsgan_g_loss: no scores");
  std::vector<Var> terms;
  for (const Var& s : fake_scores) terms.push_back(scale(mean(square(add_scalar(s, -1.0))), 0.5));
  return average(terms);
}

Var feature_match_loss(std::span<const CriticOutput> real, std::span<const CriticOutput> fake) {
  if (real.empty() || real.size() != fake.size()) {
    throw ContractError("feature_match_loss: need matching, non-empty critic lists");
  }
  std::vector<Var> per_critic;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const auto& rf = real[i].features;
    const auto& ff = fake[i].features;
    if (rf.empty() || rf.size() != ff.size()) {
      throw ContractError("feature_match_loss: critic " + std::to_string(i) + " layer counts differ");
    }
    std::vector<Var> layers;
    for (std::size_t l = 0; l < rf.size(); ++l) {
      if (rf[l].shape() != ff[l].shape()) {
        throw ContractError("feature_match_loss: critic " + std::to_string(i) + " layer " +
                            std::to_string(l) + " shapes " + to_string(rf[l].shape()) + " vs " +
                            to_string(ff[l].shape()));
      }
      layers.push_back(mean(abs(sub(rf[l], ff[l]))));
    }
    per_critic.push_back(average(layers));
  }
  return average(per_critic);
}

AcousticLoss acoustic_loss(Var pred_mel, const Tensor& target_mel, Var pred_log_dur,
                           std::span<const int> target_durations) {
  if (pred_mel.shape() != target_mel.shape()) {
    throw ContractError("acoustic_loss: mel shapes " + to_string(pred_mel.shape()) + " vs " +
                        to_string(target_mel.shape()));
  }
  if (pred_log_dur.value().size() != target_durations.size()) {
    throw ContractError("acoustic_loss: " + std::to_string(pred_log_dur.value().size()) +
                        " predicted durations for " + std::to_string(target_durations.size()) + " targets");
  }
  Tape& tape = pred_mel.tape();
  Tensor log_target(pred_log_dur.shape());
  for (std::size_t i = 0; i < target_durations.size(); ++i) {
    log_target[i] = std::log(static_cast<double>(target_durations[i]) + 1e-8);
  }
  AcousticLoss out;
  out.mel = mean(abs(sub(pred_mel, tape.constant(target_mel))));
  out.duration = mean(square(sub(pred_log_dur, tape.constant(std::move(log_target)))));
  out.total = add(out.mel, out.duration);
  return out;
}

Var total_generator_loss(const LossParts& parts, const LossWeights& weights) {
  if (!parts.acoustic.valid()) throw ContractError("total_generator_loss: acoustic term missing");
  const std::pair<const Var*, const char*> named[] = {{&parts.acoustic, "L_a"},
                                                      {&parts.adversarial, "L_adv"},
                                                      {&parts.feature_match, "L_f"},
                                                      {&parts.singer, "L_s"}};
  for (const auto& [v, name] : named) {
    if (v->valid()) require_scalar_finite(*v, name);
  }
  Var total = parts.acoustic;
  const std::pair<const Var*, double> weighted[] = {{&parts.adversarial, weights.adversarial},
                                                    {&parts.feature_match, weights.feature_match},
                                                    {&parts.singer, weights.singer}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& [v, w] = weighted[i];
    if (w == 0.0) continue;
    if (!v->valid()) throw ContractError(std::string("total_generator_loss: ") + named[i + 1].second + " missing");
    total = add(total, scale(*v, w));
  }
  return total;
}

}  // namespace xsng
