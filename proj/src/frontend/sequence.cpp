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

#include "xsng/frontend/sequence.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

#include "xsng/error.hpp"

namespace xsng {

int SequenceTriple::total_frames() const {
  return std::accumulate(note_durations.begin(), note_durations.end(), 0);
}

std::vector<int> split_note_frames(std::span<const std::string> phonemes, int frames) {
  const int n = static_cast<int>(phonemes.size());
  if (n == 0) throw ContractError("split_note_frames: syllable has no phonemes");
  if (frames < n) {
    throw ValidationError("note of " + std::to_string(frames) + " frame(s) cannot hold " +
                          std::to_string(n) + " phonemes");
  }
  std::vector<int> out(static_cast<std::size_t>(n), 0);

  int lead = 0;
  while (lead < n && !is_vowel(phonemes[static_cast<std::size_t>(lead)])) ++lead;
  if (lead == n) lead = 0;  // no vowel: one undivided group

  const int rest_count = n - lead;
  int consonant_each = 0;
  if (lead > 0) {
    const int budget = 3 * frames / 10;
    consonant_each = std::max(1, budget / lead);
    // Each remaining phoneme still needs a frame.
    while (consonant_each > 1 && frames - consonant_each * lead < rest_count) --consonant_each;
    for (int i = 0; i < lead; ++i) out[static_cast<std::size_t>(i)] = consonant_each;
  }

  const int remainder = frames - consonant_each * lead;
  int total_weight = 0;
  for (int i = lead; i < n; ++i) total_weight += is_vowel(phonemes[static_cast<std::size_t>(i)]) ? 3 : 1;
  int assigned = 0;
  for (int i = lead; i < n; ++i) {
    const int w = is_vowel(phonemes[static_cast<std::size_t>(i)]) ? 3 : 1;
    out[static_cast<std::size_t>(i)] = std::max(1, remainder * w / total_weight);
    assigned += out[static_cast<std::size_t>(i)];
  }
  while (assigned > remainder) {
    auto largest = std::max_element(out.begin() + lead, out.end());
    --*largest;
    --assigned;
  }
  out[static_cast<std::size_t>(lead)] += remainder - assigned;
  return out;
}

SequenceTriple score_to_sequences(const Score& score, const UnifiedLexicon& lexicon, Language language) {
  SequenceTriple seq;
  seq.language_id = language_id(language);
  for (std::size_t e = 0; e < score.events.size(); ++e) {
    const NoteEvent& ev = score.events[e];
    const int event_index = static_cast<int>(e);
    if (ev.is_rest()) {
      seq.phoneme_ids.push_back(UnifiedLexicon::kRestId);
      seq.note_durations.push_back(ev.duration_frames);
      seq.note_pitches.push_back(0);
      seq.source_event.push_back(event_index);
      continue;
    }
    const Pronunciation* pron = lexicon.find(ev.language, ev.syllable);
    if (pron == nullptr) {
      throw OovError("syllable '" + ev.syllable + "' at event " + std::to_string(e) +
                     " not in the " + std::string(language_code(ev.language)) + " lexicon");
    }
    const std::vector<int> frames = split_note_frames(*pron, ev.duration_frames);
    for (std::size_t p = 0; p < pron->size(); ++p) {
      seq.phoneme_ids.push_back(lexicon.phoneme_id((*pron)[p]));
      seq.note_durations.push_back(frames[p]);
      seq.note_pitches.push_back(ev.midi_pitch);
      seq.source_event.push_back(event_index);
    }
  }
  return seq;
}

std::string to_json(const SequenceTriple& seq) {
  nlohmann::ordered_json j;
  j["phoneme_ids"] = seq.phoneme_ids;
  j["note_durations"] = seq.note_durations;
  j["note_pitches"] = seq.note_pitches;
  j["language_id"] = seq.language_id;
  j["source_event"] = seq.source_event;
  return j.dump();
}

void validate(const SequenceTriple& seq) {
  const std::size_t n = seq.phoneme_ids.size();
  if (n == 0) throw ContractError("sequence is empty");
  if (seq.note_durations.size() != n || seq.note_pitches.size() != n || seq.source_event.size() != n) {
    throw ContractError("sequence lists differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.phoneme_ids[i] < 0) throw ContractError("negative phoneme id at " + std::to_string(i));
    if (seq.note_durations[i] < 1) throw ContractError("non-positive duration at " + std::to_string(i));
    if (seq.note_pitches[i] < 0 || seq.note_pitches[i] > 127) {
      throw ContractError("pitch out of MIDI range at " + std::to_string(i));
    }
  }
  if (seq.language_id < 0 || seq.language_id >= kLanguageCount) {
    throw ContractError("language id out of range");
  }
}

}  // namespace xsng
