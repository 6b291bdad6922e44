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
#include <string>
#include <string_view>
#include <vector>

namespace xsng {

enum class Language { ZH = 0, JA = 1, EN = 2 };

inline constexpr std::array<Language, 3> kLanguages{Language::ZH, Language::JA, Language::EN};
inline constexpr int kLanguageCount = 3;

std::string_view language_code(Language lang);
/// "ZH" / "JA" / "EN" (case-insensitive). Throws ValidationError otherwise.
Language parse_language(std::string_view code);
/// Throws ValidationError for ids outside [0, 3).
Language language_from_id(int id);
inline int language_id(Language lang) { return static_cast<int>(lang); }

/// One note of the score. A rest has pitch 0 and an empty syllable.
struct NoteEvent {
  std::string syllable;
  Language language = Language::ZH;
  int midi_pitch = 0;
  int duration_frames = 1;

  bool is_rest() const noexcept { return midi_pitch == 0; }
  bool operator==(const NoteEvent&) const = default;
};

struct Score {
  std::vector<NoteEvent> events;
  double frame_rate_hz = 100.0;

  int total_frames() const;
  bool operator==(const Score&) const = default;
};

/// Parses the line-oriented JSON score format: one object per line,
///   {"syllable": "ka", "lang": "JA", "pitch": 60, "dur": 10}
/// Blank lines and lines starting with '#' are skipped. A line holding only
/// {"frame_rate_hz": x} sets the metadata field. "lang" may be omitted on
/// rests.
///
/// Throws ParseError (with line and field) for malformed lines and
/// ValidationError for out-of-range values or a score with no sung note.
Score parse_score(std::string_view document);
Score load_score(const std::string& path);

/// Inverse of parse_score for well-formed scores.
std::string format_score(const Score& score);

}  // namespace xsng
