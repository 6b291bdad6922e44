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

#include <span>
#include <string>
#include <vector>

#include "xsng/frontend/lexicon.hpp"
#include "xsng/frontend/score.hpp"

namespace xsng {

/// Phoneme-level model input: ids, per-phoneme frame counts, per-phoneme
/// MIDI pitch, the conditioning language and the score event each phoneme
/// came from. All per-phoneme lists have equal length.
struct SequenceTriple {
  std::vector<int> phoneme_ids;
  std::vector<int> note_durations;
  std::vector<int> note_pitches;
  int language_id = 0;
  std::vector<int> source_event;

  std::size_t size() const noexcept { return phoneme_ids.size(); }
  int total_frames() const;
  bool operator==(const SequenceTriple&) const = default;
};

/// Splits `frames` across a syllable's phonemes.
///
/// Leading consonants (everything before the first vowel) share 30% of the
/// frames, floor(3 * frames / 10), equally with at least one frame each. The
/// rest go to the nucleus and trailing phonemes in proportion to a weight of
/// 3 per vowel and 1 per consonant (floored, at least one frame each); any
/// frames left by flooring go to the first phoneme of that group. A
/// syllable without vowels treats every phoneme as part of that group.
///
/// Throws ValidationError when frames < number of phonemes.
std::vector<int> split_note_frames(std::span<const std::string> phonemes, int frames);

/// Expands every event into phonemes over the unified id space. Each event
/// is looked up in the lexicon of its own language tag (code-switch scores
/// work); `language` only sets the conditioning language id. Rests become a
/// single phoneme 0 at pitch 0.
///
/// Throws OovError naming syllable and event position for unknown syllables.
SequenceTriple score_to_sequences(const Score& score, const UnifiedLexicon& lexicon, Language language);

/// Stable JSON text (keys in fixed order, no whitespace variation).
std::string to_json(const SequenceTriple& seq);

/// Throws ContractError describing the first broken invariant.
void validate(const SequenceTriple& seq);

}  // namespace xsng
