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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xsng/frontend/score.hpp"

namespace xsng {

// Shipped IPA inventory ------------------------------------------------------

struct IpaSymbol {
  std::string_view symbol;
  bool vowel;
};

std::span<const IpaSymbol> ipa_inventory();
bool is_known_ipa(std::string_view symbol);
/// False for unknown symbols as well as consonants.
bool is_vowel(std::string_view symbol);

// Lexicons --------------------------------------------------------------------

using Pronunciation = std::vector<std::string>;
using SyllableMap = std::map<std::string, Pronunciation, std::less<>>;

struct LexiconSource {
  Language language;
  std::string text;
  /// File name or other label for error messages.
  std::string origin;
};

/// Parses "syllable<TAB>ipa1 ipa2 ..." lines. '#' comments and blank lines are
/// skipped. Throws ParseError on malformed lines, ValidationError naming the
/// symbol and language for IPA outside the shipped inventory or for a
/// duplicated syllable.
SyllableMap parse_lexicon(std::string_view text, Language language, std::string_view origin = "<text>");

/// Per-language syllable maps merged over one phoneme-id space.
///
/// Ids are contiguous from 1 in codepoint order of the IPA symbols that occur
/// in any lexicon; 0 is reserved for padding and rests. A symbol shared by
/// several languages has a single id.
class UnifiedLexicon {
 public:
  static constexpr int kRestId = 0;

  UnifiedLexicon() = default;

  /// nullptr when the syllable is not in that language's lexicon.
  const Pronunciation* find(Language language, std::string_view syllable) const;
  /// Throws LookupError for a symbol not in the table.
  int phoneme_id(std::string_view symbol) const;
  /// Symbol for an id in [1, symbol_count()]; throws LookupError otherwise.
  const std::string& symbol(int id) const;

  std::size_t symbol_count() const noexcept { return symbols_.size(); }
  /// Embedding rows needed: symbols plus the rest/padding row.
  std::size_t vocab_size() const noexcept { return symbols_.size() + 1; }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const SyllableMap& entries(Language language) const;
  bool has_language(Language language) const;

 private:
  friend UnifiedLexicon build_lexicon(std::span<const LexiconSource> sources);

  std::map<Language, SyllableMap> by_language_;
  std::vector<std::string> symbols_;
  std::map<std::string, int, std::less<>> ids_;
};

UnifiedLexicon build_lexicon(std::span<const LexiconSource> sources);
/// Language is taken from the file stem (zh / ja / en).
UnifiedLexicon build_lexicon_from_files(std::span<const std::filesystem::path> files);
/// Loads zh.tsv, ja.tsv and en.tsv (whichever exist) from a directory.
UnifiedLexicon load_lexicon_dir(const std::filesystem::path& dir);

}  // namespace xsng
