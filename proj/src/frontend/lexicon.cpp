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

#include "xsng/frontend/lexicon.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "xsng/error.hpp"

namespace xsng {
namespace {

// Symbols the shipped lexicons may use. Affricates and aspirates are single
// symbols (tie bar / modifier letter included).
constexpr std::array<IpaSymbol, 70> kInventory{{
    // vowels
    {"a", true}, {"e", true}, {"i", true}, {"o", true}, {"u", true},
    {"y", true}, {"æ", true}, {"ɑ", true}, {"ɒ", true}, {"ɔ", true},
    {"ə", true}, {"ɛ", true}, {"ɜ", true}, {"ɤ", true}, {"ɨ", true},
    {"ɪ", true}, {"ɯ", true}, {"ʊ", true}, {"ʌ", true}, {"ø", true},
    // plosives
    {"p", false}, {"pʰ", false}, {"b", false}, {"t", false}, {"tʰ", false},
    {"d", false}, {"k", false}, {"kʰ", false}, {"ɡ", false}, {"ʔ", false},
    // nasals
    {"m", false}, {"n", false}, {"ŋ", false}, {"ɲ", false}, {"ɴ", false},
    // fricatives
    {"f", false}, {"v", false}, {"θ", false}, {"ð", false}, {"s", false},
    {"z", false}, {"ʃ", false}, {"ʒ", false}, {"ʂ", false}, {"ʐ", false},
    {"ɕ", false}, {"ʑ", false}, {"ç", false}, {"x", false}, {"h", false},
    {"ɸ", false},
    // affricates
    {"t͡s", false}, {"t͡sʰ", false}, {"t͡ɕ", false}, {"t͡ɕʰ", false},
    {"ʈ͡ʂ", false}, {"ʈ͡ʂʰ", false}, {"t͡ʃ", false}, {"d͡ʒ", false},
    {"d͡z", false},
    // approximants, taps, laterals
    {"l", false}, {"ɾ", false}, {"ɹ", false}, {"ɻ", false}, {"j", false},
    {"w", false}, {"ɥ", false}, {"ʍ", false}, {"ɰ", false}, {"ʎ", false},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Language language_from_stem(const std::filesystem::path& file) {
  try {
    return parse_language(file.stem().string());
  } catch (const ValidationError&) {
    throw ValidationError("cannot infer language from lexicon file name '" + file.string() +
                          "' (expected zh, ja or en stem)");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::span<const IpaSymbol> ipa_inventory() { return kInventory; }

bool is_known_ipa(std::string_view symbol) {
  return std::any_of(kInventory.begin(), kInventory.end(),
                     [&](const IpaSymbol& s) { return s.symbol == symbol; });
}

bool is_vowel(std::string_view symbol) {
  return std::any_of(kInventory.begin(), kInventory.end(),
                     [&](const IpaSymbol& s) { return s.vowel && s.symbol == symbol; });
}

SyllableMap parse_lexicon(std::string_view text, Language language, std::string_view origin) {
  SyllableMap out;
  std::istringstream lines{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  const std::string lang(language_code(language));
  while (std::getline(lines, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string at = std::string(origin) + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(at + ": expected 'syllable<TAB>ipa ...'");
    const std::string syllable(trim(line.substr(0, tab)));
    if (syllable.empty()) throw ParseError(at + ": empty syllable");

    Pronunciation pron;
    std::istringstream symbols{std::string(line.substr(tab + 1))};
    std::string sym;
    while (symbols >> sym) {
      if (!is_known_ipa(sym)) {
        throw ValidationError(at + ": unknown IPA symbol '" + sym + "' in " + lang + " lexicon");
      }
      pron.push_back(sym);
    }
    if (pron.empty()) throw ParseError(at + ": syllable '" + syllable + "' has no phonemes");
    if (!out.emplace(syllable, std::move(pron)).second) {
      throw ValidationError(at + ": duplicate syllable '" + syllable + "' in " + lang + " lexicon");
    }
  }
  return out;
}

const Pronunciation* UnifiedLexicon::find(Language language, std::string_view syllable) const {
  const auto lang = by_language_.find(language);
  if (lang == by_language_.end()) return nullptr;
  const auto it = lang->second.find(syllable);
  return it == lang->second.end() ? nullptr : &it->second;
}

int UnifiedLexicon::phoneme_id(std::string_view symbol) const {
  const auto it = ids_.find(symbol);
  if (it == ids_.end()) throw LookupError("IPA symbol '" + std::string(symbol) + "' not in symbol table");
  return it->second;
}

const std::string& UnifiedLexicon::symbol(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > symbols_.size()) {
    throw LookupError("phoneme id " + std::to_string(id) + " outside [1, " +
                      std::to_string(symbols_.size()) + "]");
  }
  return symbols_[static_cast<std::size_t>(id) - 1];
}

const SyllableMap& UnifiedLexicon::entries(Language language) const {
  static const SyllableMap kEmpty;
  const auto it = by_language_.find(language);
  return it == by_language_.end() ? kEmpty : it->second;
}

bool UnifiedLexicon::has_language(Language language) const {
  return by_language_.count(language) != 0;
}

UnifiedLexicon build_lexicon(std::span<const LexiconSource> sources) {
  UnifiedLexicon lex;
  std::set<std::string> all;  // byte order == codepoint order for UTF-8
  for (const LexiconSource& src : sources) {
    if (lex.by_language_.count(src.language) != 0) {
      throw ValidationError("two lexicons given for " + std::string(language_code(src.language)));
    }
    SyllableMap entries = parse_lexicon(src.text, src.language, src.origin);
    for (const auto& [syl, pron] : entries) all.insert(pron.begin(), pron.end());
    lex.by_language_.emplace(src.language, std::move(entries));
  }
  lex.symbols_.assign(all.begin(), all.end());
  for (std::size_t i = 0; i < lex.symbols_.size(); ++i) {
    lex.ids_.emplace(lex.symbols_[i], static_cast<int>(i) + 1);
  }
  return lex;
}

UnifiedLexicon build_lexicon_from_files(std::span<const std::filesystem::path> files) {
  std::vector<LexiconSource> sources;
  for (const auto& f : files) {
    sources.push_back(LexiconSource{language_from_stem(f), read_file(f), f.filename().string()});
  }
  return build_lexicon(sources);
}

UnifiedLexicon load_lexicon_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FileError(dir.string());
  std::vector<std::filesystem::path> files;
  for (const char* stem : {"zh", "ja", "en"}) {
    const auto p = dir / (std::string(stem) + ".tsv");
    if (std::filesystem::exists(p)) files.push_back(p);
  }
  if (files.empty()) throw FileError((dir / "{zh,ja,en}.tsv").string());
  return build_lexicon_from_files(files);
}

}  // namespace xsng
