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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xsng/params.hpp"
#include "xsng/rng.hpp"

namespace xsng {

/// Contiguous mel-bin ranges, half-open [lo, hi), in band order.
struct SubBandSplit {
  std::vector<std::pair<std::size_t, std::size_t>> bands;

  /// `band_count` near-equal bands; earlier bands take the remainder.
  static SubBandSplit equal(std::size_t bins, std::size_t band_count);
  /// Throws ConfigError unless the bands partition [0, bins).
  void validate(std::size_t bins) const;
};

/// Column slices of mel [F x B], one per band.
std::vector<Var> split_subbands(Var mel, const SubBandSplit& split);

struct DiscriminatorConfig {
  std::size_t channels = 8;
  std::size_t kernel = 3;
  double leaky_slope = 0.2;
  std::size_t band_count = 2;
  std::size_t segment_frames = 32;

  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

/// One detail critic per band ("disc.detail.<b>.*") and one segment critic
/// ("disc.segment.*"), each conv 1 -> C -> C -> 1.
ParamStore init_discriminator_params(const DiscriminatorConfig& config, std::uint64_t seed);
std::vector<std::string> discriminator_prefixes(const DiscriminatorConfig& config);

struct CriticOutput {
  Var score;                  // [F' x B'] score map
  std::vector<Var> features;  // every conv layer output, score map last
};

/// Three same-padded 3x3 convs over time x bins with LeakyReLU after the
/// first two. Throws DimensionError when x is smaller than the kernel.
CriticOutput disc_forward(Var x, const ParamBinding& p, const std::string& prefix,
                          const DiscriminatorConfig& config);

/// Time window seen by the segment critic.
struct SegmentCrop {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Uniform start for a `crop`-frame window; the whole input when it is
/// not longer than `crop`.
SegmentCrop draw_segment_crop(std::size_t frames, std::size_t crop, CounterRng& rng);

/// All critics on one mel: detail critics on the sub-bands, then the
/// segment critic on the crop of the full band.
std::vector<CriticOutput> run_discriminators(Var mel, const ParamBinding& p,
                                             const DiscriminatorConfig& config,
                                             const SegmentCrop& crop);

std::vector<Var> scores_of(std::span<const CriticOutput> outputs);

// Losses --------------------------------------------------------------------

/// mean_i [ 0.5 E(D_i(real) - 1)^2 + 0.5 E D_i(fake)^2 ].
Var lsgan_d_loss(std::span<const Var> real_scores, std::span<const Var> fake_scores);
/// mean_i 0.5 E(D_i(fake) - 1)^2.
Var lsgan_g_loss(std::span<const Var> fake_scores);
/// Mean over critics of the mean over layers of mean |real - fake|.
/// Throws ContractError on a count or shape mismatch.
Var feature_match_loss(std::span<const CriticOutput> real, std::span<const CriticOutput> fake);

struct AcousticLoss {
  Var total;
  Var mel;       // mean absolute error
  Var duration;  // mean squared error of log durations
};

/// L1(mel) + MSE(pred_log_dur, log(target + 1e-8)). Throws ContractError
/// on shape mismatch.
AcousticLoss acoustic_loss(Var pred_mel, const Tensor& target_mel, Var pred_log_dur,
                           std::span<const int> target_durations);

struct LossWeights {
  double adversarial = 1.0;
  double feature_match = 1.0;
  double singer = 0.5;
  bool operator==(const LossWeights&) const = default;
};

/// Unset parts are allowed only when their weight is zero.
struct LossParts {
  Var acoustic;
  Var adversarial;
  Var feature_match;
  Var singer;
};

/// L_a + w_adv L_adv + w_fm L_f + w_s L_s. Zero-weight terms are left out
/// of the graph. Throws NumericError naming the first non-finite part.
Var total_generator_loss(const LossParts& parts, const LossWeights& weights);

}  // namespace xsng
