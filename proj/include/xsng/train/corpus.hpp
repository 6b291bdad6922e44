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

#include "xsng/frontend/lexicon.hpp"
#include "xsng/frontend/sequence.hpp"
#include "xsng/train/config.hpp"

namespace xsng {

struct CorpusItem {
  Score score;
  SequenceTriple seq;
  Tensor mel;  // [F x mel_bins], F = seq.total_frames()
  int singer_id = 0;
  int language_id = 0;

  bool operator==(const CorpusItem&) const = default;
};

struct SyntheticCorpus {
  std::uint64_t seed = 0;
  /// singer_language[s] is the only language singer s sings.
  std::vector<int> singer_language;
  std::vector<CorpusItem> items;

  bool operator==(const SyntheticCorpus&) const = default;
};

/// Frame-level renderer for target mels: a fixed random row per phoneme, a
/// pitch direction scaled by (pitch - 60) / 12 and a timbre row per singer.
struct MelRenderer {
  Tensor phoneme;  // [vocab x B]
  Tensor pitch;    // [B]
  Tensor timbre;   // [S x B]

  static MelRenderer make(std::size_t vocab, std::size_t mel_bins, std::size_t singers, std::uint64_t seed);
  /// Noise-free target for one item.
  Tensor render(const SequenceTriple& seq, int singer_id) const;
};

/// Pronunciations present in every lexicon, in a fixed order, and the
/// syllable spelling each language uses for them.
struct SharedSyllables {
  std::vector<Pronunciation> pronunciations;
  /// spelling[language_id][k] spells pronunciations[k].
  std::vector<std::vector<std::string>> spelling;
};
SharedSyllables shared_syllables(const UnifiedLexicon& lexicon, std::size_t language_count);

/// Deterministic corpus: item i belongs to singer i mod S and singer s
/// sings only language s. Scores are drawn from the lexicons, run through
/// the frontend and rendered to mels.
/// Throws ConfigError when singers cannot be matched one-to-one with
/// languages.
SyntheticCorpus make_synthetic_corpus(const TrainConfig& config, const UnifiedLexicon& lexicon,
                                      std::uint64_t seed);

}  // namespace xsng
