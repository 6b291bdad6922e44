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

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xsng/error.hpp"
#include "xsng/frontend/lexicon.hpp"
#include "xsng/frontend/score.hpp"
#include "xsng/frontend/sequence.hpp"
#include "xsng/rng.hpp"

namespace xsng {
namespace {

const std::filesystem::path kData = XSNG_DATA_DIR;

const UnifiedLexicon& shipped() {
  static const UnifiedLexicon lex = load_lexicon_dir(kData / "lexicons");
  return lex;
}

std::vector<std::string> ipa(std::initializer_list<const char*> symbols) { return {symbols.begin(), symbols.end()}; }

// parse_score ---------------------------------------------------------------

TEST(ParseScore, OneNote) {
  const Score s = parse_score(R"({"syllable": "ka", "lang": "JA", "pitch": 60, "dur": 10})");
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].syllable, "ka");
  EXPECT_EQ(s.events[0].language, Language::JA);
  EXPECT_EQ(s.events[0].midi_pitch, 60);
  EXPECT_EQ(s.events[0].duration_frames, 10);
}

TEST(ParseScore, RestEvent) {
  const Score s = parse_score(
      "{\"syllable\": \"ka\", \"lang\": \"JA\", \"pitch\": 60, \"dur\": 10}\n"
      "{\"syllable\": \"\", \"pitch\": 0, \"dur\": 5}\n");
  ASSERT_EQ(s.events.size(), 2u);
  EXPECT_TRUE(s.events[1].is_rest());
  EXPECT_EQ(s.events[1].syllable, "");
  EXPECT_EQ(s.events[1].duration_frames, 5);
}

TEST(ParseScore, PitchOutOfRangeIsValidationError) {
  EXPECT_THROW(parse_score(R"({"syllable": "ka", "lang": "JA", "pitch": 200, "dur": 10})"), ValidationError);
  EXPECT_THROW(parse_score(R"({"syllable": "ka", "lang": "JA", "pitch": -1, "dur": 10})"), ValidationError);
}

TEST(ParseScore, BadDurationAndRestShapeAreValidationErrors) {
  EXPECT_THROW(parse_score(R"({"syllable": "ka", "lang": "JA", "pitch": 60, "dur": 0})"), ValidationError);
  EXPECT_THROW(parse_score("{\"syllable\": \"ka\", \"lang\": \"JA\", \"pitch\": 60, \"dur\": 4}\n"
                           "{\"syllable\": \"ka\", \"pitch\": 0, \"dur\": 5}"),
               ValidationError);
  EXPECT_THROW(parse_score(R"({"syllable": "", "pitch": 0, "dur": 5})"), ValidationError);
}

TEST(ParseScore, MalformedLineReportsLineAndField) {
  try {
    parse_score("# header\n{\"syllable\": \"ka\", \"lang\": \"JA\", \"pitch\": 60, \"dur\": 4}\n"
                "{\"syllable\": \"ka\", \"lang\": \"JA\", \"pitch\": \"high\", \"dur\": 4}\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("pitch"), std::string::npos) << what;
  }
  EXPECT_THROW(parse_score("{not json"), ParseError);
  EXPECT_THROW(parse_score(R"({"syllable": "ka", "lang": "FR", "pitch": 60, "dur": 4})"), ValidationError);
}

TEST(ParseScore, CommentsAndBlankLinesSkipped) {
  const Score s = parse_score("# c\n\n{\"syllable\": \"ma\", \"lang\": \"ZH\", \"pitch\": 61, \"dur\": 3}\n\n");
  EXPECT_EQ(s.events.size(), 1u);
}

TEST(ParseScore, FormatRoundTrips) {
  const Score s = load_score((kData / "scores" / "code_switch.jsonl").string());
  EXPECT_EQ(parse_score(format_score(s)), s);
}

// build_lexicon -------------------------------------------------------------

TEST(Lexicon, SharedSymbolsShareIds) {
  const LexiconSource src[] = {{Language::ZH, "ma\tm a\n", "zh"}, {Language::JA, "ma\tm a\n", "ja"}};
  const UnifiedLexicon lex = build_lexicon(src);
  EXPECT_EQ(lex.symbol_count(), 2u);
  EXPECT_EQ(*lex.find(Language::ZH, "ma"), *lex.find(Language::JA, "ma"));
}

TEST(Lexicon, DisjointLexiconsCountSymbols) {
  const LexiconSource src[] = {
      {Language::ZH, "ma\tm a\n", "zh"}, {Language::JA, "ki\tk i\n", "ja"}, {Language::EN, "so\ts o\n", "en"}};
  const UnifiedLexicon lex = build_lexicon(src);
  ASSERT_EQ(lex.symbol_count(), 6u);
  std::set<int> ids;
  for (const std::string& s : lex.symbols()) ids.insert(lex.phoneme_id(s));
  EXPECT_EQ(ids, (std::set<int>{1, 2, 3, 4, 5, 6}));
  // Codepoint order: a < i < k < m < o < s.
  EXPECT_EQ(lex.phoneme_id("a"), 1);
  EXPECT_EQ(lex.phoneme_id("s"), 6);
}

TEST(Lexicon, UnknownSymbolNamesSymbolAndLanguage) {
  const LexiconSource src[] = {{Language::EN, "qq\tq a\n", "en"}};
  try {
    build_lexicon(src);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("q"), std::string::npos) << what;
    EXPECT_NE(what.find("EN"), std::string::npos) << what;
  }
}

TEST(Lexicon, MalformedLineIsParseError) {
  EXPECT_THROW(parse_lexicon("ma m a\n", Language::ZH), ParseError);
  EXPECT_THROW(parse_lexicon("ma\t\n", Language::ZH), ParseError);
}

// Set union over the files, independent of the library parser.
TEST(Lexicon, ShippedTableEqualsSymbolUnion) {
  std::set<std::string> symbols;
  std::size_t syllables[3] = {0, 0, 0};
  for (const Language lang : kLanguages) {
    std::string code(language_code(lang));
    for (char& c : code) c = static_cast<char>(std::tolower(c));
    std::ifstream in(kData / "lexicons" / (code + ".tsv"));
    ASSERT_TRUE(in) << code;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      ++syllables[language_id(lang)];
      std::istringstream fields(line.substr(line.find('\t') + 1));
      std::string sym;
      while (fields >> sym) symbols.insert(sym);
    }
  }
  EXPECT_EQ(syllables[0], 30u);
  EXPECT_EQ(syllables[1], 25u);
  EXPECT_EQ(syllables[2], 30u);
  const UnifiedLexicon& lex = shipped();
  EXPECT_EQ(lex.symbol_count(), symbols.size());
  EXPECT_EQ(std::vector<std::string>(symbols.begin(), symbols.end()), lex.symbols());
  for (const Language lang : kLanguages) {
    for (const auto& [syllable, pron] : lex.entries(lang)) {
      EXPECT_FALSE(pron.empty()) << syllable;
      for (const std::string& s : pron) EXPECT_GE(lex.phoneme_id(s), 1);
    }
  }
}

TEST(LexiconProperty, SharedIpaEncodesIdentically) {
  const UnifiedLexicon& lex = shipped();
  for (const Language a : kLanguages) {
    for (const Language b : kLanguages) {
      for (const auto& [syl_a, pron_a] : lex.entries(a)) {
        for (const auto& [syl_b, pron_b] : lex.entries(b)) {
          if (pron_a != pron_b) continue;
          Score sa{{{syl_a, a, 60, 10}}}, sb{{{syl_b, b, 60, 10}}};
          EXPECT_EQ(score_to_sequences(sa, lex, a).phoneme_ids, score_to_sequences(sb, lex, b).phoneme_ids)
              << syl_a << " / " << syl_b;
        }
      }
    }
  }
}

// split_note_frames ---------------------------------------------------------

TEST(SplitNoteFrames, ConsonantVowel) {
  EXPECT_EQ(split_note_frames(ipa({"k", "a"}), 10), (std::vector<int>{3, 7}));
}

TEST(SplitNoteFrames, SinglePhonemeTakesAll) {
  EXPECT_EQ(split_note_frames(ipa({"a"}), 8), (std::vector<int>{8}));
}

TEST(SplitNoteFrames, ClusterWithDiphthongAndCoda) {
  // Onset b, r: floor(48 / 10) = 4 -> 2 each. Nucleus a, i, coda t share
  // 12 with weights 3, 3, 1: 5, 5, 1, leftover 1 to a.
  EXPECT_EQ(split_note_frames(ipa({"b", "ɹ", "a", "ɪ", "t"}), 16), (std::vector<int>{2, 2, 6, 5, 1}));
  // x: floor(36 / 10) = 3; a, u share 9: 4, 4, leftover to a.
  EXPECT_EQ(split_note_frames(ipa({"x", "a", "u"}), 12), (std::vector<int>{3, 5, 4}));
}

TEST(SplitNoteFrames, ShortNoteGivesOnsetAtLeastOneFrame) {
  EXPECT_EQ(split_note_frames(ipa({"k", "a"}), 2), (std::vector<int>{1, 1}));
  EXPECT_EQ(split_note_frames(ipa({"s", "t", "a"}), 3), (std::vector<int>{1, 1, 1}));
}

TEST(SplitNoteFrames, FewerFramesThanPhonemesIsValidationError) {
  EXPECT_THROW(split_note_frames(ipa({"b", "ɹ", "a", "ɪ", "t"}), 4), ValidationError);
}

TEST(SplitNoteFramesProperty, ConservesFramesAndKeepsEveryPhoneme) {
  CounterRng rng = CounterRng::derive(1, rng_stream::kTest);
  const auto inventory = ipa_inventory();
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 6));
    std::vector<std::string> pron;
    for (std::size_t i = 0; i < n; ++i) {
      pron.emplace_back(inventory[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(inventory.size()) - 1))].symbol);
    }
    const int frames = static_cast<int>(rng.uniform_int(static_cast<std::int64_t>(n), 200));
    const std::vector<int> split = split_note_frames(pron, frames);
    ASSERT_EQ(split.size(), n);
    EXPECT_EQ(std::accumulate(split.begin(), split.end(), 0), frames) << "trial " << trial;
    for (const int f : split) EXPECT_GE(f, 1);
  }
}

// score_to_sequences --------------------------------------------------------

TEST(ScoreToSequences, OneNoteKa) {
  const Score s = load_score((kData / "scores" / "one_note.jsonl").string());
  const UnifiedLexicon& lex = shipped();
  const SequenceTriple seq = score_to_sequences(s, lex, Language::JA);
  EXPECT_EQ(seq.phoneme_ids, (std::vector<int>{lex.phoneme_id("k"), lex.phoneme_id("a")}));
  EXPECT_EQ(seq.note_durations, (std::vector<int>{3, 7}));
  EXPECT_EQ(seq.note_pitches, (std::vector<int>{60, 60}));
  EXPECT_EQ(seq.language_id, language_id(Language::JA));
}

TEST(ScoreToSequences, RestBecomesIdZero) {
  const Score s = parse_score("{\"syllable\": \"a\", \"lang\": \"JA\", \"pitch\": 60, \"dur\": 8}\n"
                              "{\"syllable\": \"\", \"pitch\": 0, \"dur\": 5}\n");
  const SequenceTriple seq = score_to_sequences(s, shipped(), Language::JA);
  EXPECT_EQ(seq.phoneme_ids, (std::vector<int>{shipped().phoneme_id("a"), 0}));
  EXPECT_EQ(seq.note_durations, (std::vector<int>{8, 5}));
  EXPECT_EQ(seq.note_pitches, (std::vector<int>{60, 0}));
  EXPECT_EQ(seq.source_event, (std::vector<int>{0, 1}));
}

TEST(ScoreToSequences, OovNamesSyllableAndPosition) {
  const Score s = parse_score("{\"syllable\": \"ma\", \"lang\": \"ZH\", \"pitch\": 60, \"dur\": 8}\n"
                              "{\"syllable\": \"zzz\", \"lang\": \"ZH\", \"pitch\": 60, \"dur\": 8}\n");
  try {
    score_to_sequences(s, shipped(), Language::ZH);
    FAIL() << "expected OovError";
  } catch (const OovError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("zzz"), std::string::npos) << what;
    EXPECT_NE(what.find("1"), std::string::npos) << what;
  }
}

TEST(ScoreToSequences, CodeSwitchUsesEachEventsLexicon) {
  Score s = load_score((kData / "scores" / "code_switch.jsonl").string());
  s.events.push_back({"ka", Language::JA, 60, 6});
  const UnifiedLexicon& lex = shipped();
  const SequenceTriple seq = score_to_sequences(s, lex, Language::ZH);
  validate(seq);
  EXPECT_EQ(seq.total_frames(), s.total_frames());
  // "ka" in JA is [k a]; ZH spells its aspirated stop differently.
  EXPECT_EQ(seq.phoneme_ids[seq.size() - 2], lex.phoneme_id("k"));
  EXPECT_EQ(seq.phoneme_ids[seq.size() - 1], lex.phoneme_id("a"));
}

TEST(ScoreToSequences, DeterministicSerialization) {
  const Score s = load_score((kData / "scores" / "code_switch.jsonl").string());
  EXPECT_EQ(to_json(score_to_sequences(s, shipped(), Language::EN)),
            to_json(score_to_sequences(s, shipped(), Language::EN)));
}

TEST(ScoreToSequencesProperty, FrameConservation) {
  const UnifiedLexicon& lex = shipped();
  CounterRng rng = CounterRng::derive(2, rng_stream::kTest);
  for (int trial = 0; trial < 300; ++trial) {
    Score s;
    const auto n = rng.uniform_int(1, 20);
    for (std::int64_t i = 0; i < n; ++i) {
      const Language lang = kLanguages[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      if (i > 0 && rng.uniform() < 0.15) {
        s.events.push_back({"", lang, 0, static_cast<int>(rng.uniform_int(1, 30))});
        continue;
      }
      const auto& entries = lex.entries(lang);
      auto it = entries.begin();
      std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(entries.size()) - 1));
      const int frames = static_cast<int>(rng.uniform_int(static_cast<std::int64_t>(it->second.size()), 60));
      s.events.push_back({it->first, lang, static_cast<int>(rng.uniform_int(1, 127)), frames});
    }
    const SequenceTriple seq = score_to_sequences(s, lex, s.events[0].language);
    validate(seq);
    EXPECT_EQ(seq.total_frames(), s.total_frames()) << "trial " << trial;
  }
}

TEST(ValidateSequence, DetectsBrokenInvariants) {
  SequenceTriple seq{{1, 2}, {3, 7}, {60, 60}, 0, {0, 0}};
  EXPECT_NO_THROW(validate(seq));
  seq.note_durations = {3};
  EXPECT_THROW(validate(seq), ContractError);
  seq.note_durations = {0, 7};
  EXPECT_THROW(validate(seq), ContractError);
}

}  // namespace
}  // namespace xsng
