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

#include "xsng/train/corpus.hpp"

#include <map>

#include "xsng/error.hpp"

namespace xsng {
namespace {

struct Choice {
  std::string syllable;
  std::size_t phonemes;
};

// Syllables an item of `language` may use.
std::vector<Choice> syllable_pool(const TrainConfig& config, const UnifiedLexicon& lexicon,
                                  const SharedSyllables& shared, int language) {
  std::vector<Choice> pool;
  if (config.corpus.shared_syllables) {
    for (std::size_t k = 0; k < shared.pronunciations.size(); ++k) {
      pool.push_back({shared.spelling[static_cast<std::size_t>(language)][k], shared.pronunciations[k].size()});
    }
  } else {
    for (const auto& [syllable, pron] : lexicon.entries(language_from_id(language))) {
      pool.push_back({syllable, pron.size()});
    }
  }
  if (pool.empty()) throw ConfigError("corpus: no syllables available for language " + std::to_string(language));
  return pool;
}

Score draw_score(const std::vector<Choice>& pool, Language language, const CorpusConfig& c, CounterRng& rng) {
  int remaining = static_cast<int>(rng.uniform_int(c.min_phonemes, c.max_phonemes));
  Score score;
  std::vector<std::size_t> fitting;
  while (remaining > 0) {
    fitting.clear();
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (static_cast<int>(pool[k].phonemes) <= remaining) fitting.push_back(k);
    }
    if (fitting.empty()) {
      // A rest is one phoneme; it pads the item to its drawn length.
      const int frames = static_cast<int>(rng.uniform_int(1, 3));
      const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(score.events.size())));
      score.events.insert(score.events.begin() + static_cast<std::ptrdiff_t>(at), NoteEvent{"", language, 0, frames});
      --remaining;
      continue;
    }
    const Choice& pick = pool[fitting[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(fitting.size()) - 1))]];
    const int n = static_cast<int>(pick.phonemes);
    const int pitch = static_cast<int>(rng.uniform_int(c.min_pitch, c.max_pitch));
    const int frames = n + static_cast<int>(rng.uniform_int(1, n + 2));
    score.events.push_back(NoteEvent{pick.syllable, language, pitch, frames});
    remaining -= n;
  }
  return score;
}

}  // namespace

MelRenderer MelRenderer::make(std::size_t vocab, std::size_t mel_bins, std::size_t singers, std::uint64_t seed) {
  CounterRng rng = CounterRng::derive(seed, rng_stream::kRender, 0);
  MelRenderer r;
  r.phoneme = Tensor::randn({vocab, mel_bins}, rng, 0.5);
  r.pitch = Tensor::randn({mel_bins}, rng, 0.5);
  r.timbre = Tensor::randn({singers, mel_bins}, rng, 1.0);
  return r;
}

Tensor MelRenderer::render(const SequenceTriple& seq, int singer_id) const {
  const std::size_t bins = pitch.size();
  if (singer_id < 0 || static_cast<std::size_t>(singer_id) >= timbre.dim(0)) {
    throw LookupError("renderer: singer " + std::to_string(singer_id) + " out of range");
  }
  Tensor mel({static_cast<std::size_t>(seq.total_frames()), bins});
  std::size_t frame = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto id = static_cast<std::size_t>(seq.phoneme_ids[t]);
    if (id >= phoneme.dim(0)) throw LookupError("renderer: phoneme id " + std::to_string(id) + " out of range");
    const bool rest = seq.phoneme_ids[t] == UnifiedLexicon::kRestId;
    const double pitch_scale = rest ? 0.0 : (seq.note_pitches[t] - 60) / 12.0;
    for (int k = 0; k < seq.note_durations[t]; ++k, ++frame) {
      for (std::size_t b = 0; b < bins; ++b) {
        mel.at(frame, b) = phoneme.at(id, b) + pitch_scale * pitch[b] +
                           timbre.at(static_cast<std::size_t>(singer_id), b);
      }
    }
  }
  return mel;
}

SharedSyllables shared_syllables(const UnifiedLexicon& lexicon, std::size_t language_count) {
  // pronunciation -> first spelling per language (map order)
  std::map<Pronunciation, std::vector<std::string>> table;
  for (std::size_t l = 0; l < language_count; ++l) {
    for (const auto& [syllable, pron] : lexicon.entries(language_from_id(static_cast<int>(l)))) {
      auto& spellings = table[pron];
      spellings.resize(language_count);
      if (spellings[l].empty()) spellings[l] = syllable;
    }
  }
  SharedSyllables out;
  out.spelling.resize(language_count);
  for (const auto& [pron, spellings] : table) {
    bool everywhere = true;
    for (const auto& s : spellings) everywhere = everywhere && !s.empty();
    if (!everywhere) continue;
    out.pronunciations.push_back(pron);
    for (std::size_t l = 0; l < language_count; ++l) out.spelling[l].push_back(spellings[l]);
  }
  return out;
}

SyntheticCorpus make_synthetic_corpus(const TrainConfig& config, const UnifiedLexicon& lexicon, std::uint64_t seed) {
  const std::size_t singers = config.generator.singer_count;
  const std::size_t languages = config.generator.language_count;
  if (singers < 2 || languages < 2) throw ConfigError("corpus: need at least 2 singers and 2 languages");
  if (singers != languages || languages > static_cast<std::size_t>(kLanguageCount)) {
    throw ConfigError("corpus: " + std::to_string(singers) + " singers cannot each own one of " +
                      std::to_string(languages) + " languages");
  }
  for (std::size_t l = 0; l < languages; ++l) {
    if (!lexicon.has_language(language_from_id(static_cast<int>(l)))) {
      throw ConfigError("corpus: lexicon for " + std::string(language_code(language_from_id(static_cast<int>(l)))) +
                        " is missing");
    }
  }
  if (lexicon.vocab_size() > config.generator.phoneme_vocab) {
    throw ConfigError("corpus: lexicon needs " + std::to_string(lexicon.vocab_size()) +
                      " phoneme rows, generator has " + std::to_string(config.generator.phoneme_vocab));
  }
  config.corpus.validate();

  SyntheticCorpus corpus;
  corpus.seed = seed;
  for (std::size_t s = 0; s < singers; ++s) corpus.singer_language.push_back(static_cast<int>(s));

  const SharedSyllables shared = shared_syllables(lexicon, languages);
  if (config.corpus.shared_syllables && shared.pronunciations.empty()) {
    throw ConfigError("corpus: the lexicons share no pronunciation");
  }
  std::vector<std::vector<Choice>> pools;
  for (std::size_t l = 0; l < languages; ++l) pools.push_back(syllable_pool(config, lexicon, shared, static_cast<int>(l)));

  const MelRenderer renderer =
      MelRenderer::make(config.generator.phoneme_vocab, config.generator.mel_bins, singers, config.corpus.render_seed);

  for (std::size_t i = 0; i < config.corpus.items; ++i) {
    CounterRng rng = CounterRng::derive(seed, rng_stream::kCorpus, i);
    CorpusItem item;
    item.singer_id = static_cast<int>(i % singers);
    item.language_id = corpus.singer_language[static_cast<std::size_t>(item.singer_id)];
    const Language language = language_from_id(item.language_id);
    item.score = draw_score(pools[static_cast<std::size_t>(item.language_id)], language, config.corpus, rng);
    item.seq = score_to_sequences(item.score, lexicon, language);
    item.mel = renderer.render(item.seq, item.singer_id);
    for (std::size_t k = 0; k < item.mel.size(); ++k) item.mel[k] += config.corpus.noise * rng.normal();
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

}  // namespace xsng
