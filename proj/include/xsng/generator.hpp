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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xsng/frontend/sequence.hpp"
#include "xsng/params.hpp"

namespace xsng {

struct GeneratorConfig {
  std::size_t hidden_dim = 64;
  std::size_t encoder_blocks = 2;
  std::size_t decoder_blocks = 2;
  std::size_t attention_heads = 2;
  std::size_t ffn_dim = 256;
  std::size_t conv_kernel = 3;
  std::size_t parallel_conv_branches = 2;
  std::size_t mel_bins = 16;
  std::size_t phoneme_vocab = 64;
  std::size_t pitch_vocab = 128;
  std::size_t duration_bucket_vocab = 12;
  std::size_t language_count = 3;
  std::size_t singer_count = 3;
  double epsilon = 1e-5;
  /// When false the first encoder block uses plain layer norm (no
  /// language conditioning anywhere in the network).
  bool use_cln = true;

  /// Throws ConfigError for zero sizes, hidden_dim not divisible by the
  /// head count, an even conv kernel or a bucket vocab below 12.
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

/// Lower edges of the note-duration buckets; the last bucket is open.
inline constexpr std::array<int, 12> kDurationBucketEdges{1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};

/// Index of the largest edge <= frames. Throws ContractError for frames < 1.
int duration_bucket(int frames);

/// Fixed sinusoidal table [length x dim]: sin on even columns, cos on odd.
Tensor sinusoidal_encoding(std::size_t length, std::size_t dim);

/// Fresh parameters under the "gen." prefix. Language rows and W_alpha /
/// W_beta are random, but W_alpha / W_beta are chosen so that every row
/// maps to alpha = 1, beta = 0: an untrained network ignores the language
/// id until training separates the rows.
ParamStore init_generator_params(const GeneratorConfig& config, std::uint64_t seed);

/// Phoneme + pitch + duration-bucket embeddings plus positional encoding,
/// [T x d].
Var embed_inputs(const SequenceTriple& seq, const ParamBinding& p, const GeneratorConfig& config);

/// Conditional layer norm: alpha = W_alpha^T e, beta = W_beta^T e, then
/// alpha * LN(x) + beta on every row. `e` has d elements.
Var cln(Var x, Var e, Var w_alpha, Var w_beta, double epsilon);

struct LanguageCondition {
  Var embedding;  // e_l, [1 x d]
  Var w_alpha;
  Var w_beta;
};

/// One ConvFFT block with parameters under `prefix` (e.g. "gen.enc.0"):
/// y1 = LN(x + MHA(x) + sum_b relu(conv_b(x))), y = NORM(y1 + FFN(y1)),
/// NORM being cln when `condition` is given and plain LN otherwise.
Var conv_fft_block(Var x, const ParamBinding& p, const std::string& prefix,
                   const GeneratorConfig& config, const LanguageCondition* condition);

/// Repeats row t durations[t] times. Throws ContractError for a length
/// mismatch or a duration < 1.
Var length_regulate(Var x, std::span<const int> durations);

/// Two conv+ReLU layers and a linear head; returns log-frames, shape [T].
Var predict_durations(Var h, const ParamBinding& p, const GeneratorConfig& config);

/// Inference rounding: max(1, round(exp(log_frames))). Throws NumericError
/// for non-finite values or more than kMaxPredictedFrames on one phoneme.
inline constexpr int kMaxPredictedFrames = 10000;
std::vector<int> durations_from_log(const Tensor& log_frames);

enum class Mode { Train, Inference };

struct GeneratorOutput {
  Var mel;                 // [F x mel_bins]
  Var encoder_out;         // [T x d], before singer injection
  Var predicted_log_dur;   // [T]
  std::vector<int> durations;  // per-phoneme frames actually used
  Var embedded;            // embed_inputs output
  std::vector<Var> encoder_blocks;  // output of each encoder block
};

/// Full forward pass. Training requires ground-truth durations (teacher
/// forcing); inference ignores them and rounds the predicted durations.
/// Throws ContractError when training durations are missing or the wrong
/// length, LookupError for ids outside their tables.
GeneratorOutput generator_forward(const SequenceTriple& seq, int language_id, int singer_id,
                                  const ParamBinding& p, const GeneratorConfig& config, Mode mode,
                                  std::optional<std::span<const int>> ground_truth_durations = std::nullopt);

}  // namespace xsng
