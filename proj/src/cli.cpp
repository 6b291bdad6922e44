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

#include "xsng/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "xsng/error.hpp"
#include "xsng/frontend/sequence.hpp"
#include "xsng/generator.hpp"
#include "xsng/gradcheck_suite.hpp"
#include "xsng/train/checkpoint.hpp"
#include "xsng/train/probe.hpp"
#include "xsng/train/trainer.hpp"

namespace xsng {
namespace {

constexpr double kGradTolerance = 1e-4;

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw FileError(path);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw FileError(path.string());
  return out;
}

Language resolve_language(const std::string& flag, const Score& score) {
  if (!flag.empty()) return parse_language(flag);
  for (const NoteEvent& e : score.events) {
    if (!e.is_rest()) return e.language;
  }
  throw ValidationError("score has no sung note");
}

std::uint64_t resolve_seed(std::uint64_t config_seed, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("XSNG_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("XSNG_SEED is not an unsigned integer: ") + env);
    return v;
  }
  return config_seed;
}

int cmd_frontend(const std::string& score_path, const std::string& lang, const std::string& lexicon_dir,
                 const std::string& out_path, std::ostream& out) {
  require_file(score_path);
  const Score score = load_score(score_path);
  const UnifiedLexicon lexicon = load_lexicon_dir(lexicon_dir.empty() ? default_lexicon_dir() : std::filesystem::path(lexicon_dir));
  const SequenceTriple seq = score_to_sequences(score, lexicon, resolve_language(lang, score));
  validate(seq);
  if (out_path.empty()) {
    out << to_json(seq) << "\n";
  } else {
    open_out(out_path) << to_json(seq) << "\n";
  }
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
              std::ostream& out) {
  require_file(config_path);
  TrainConfig config = load_config(config_path);
  config.seed = resolve_seed(config.seed, seed);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const UnifiedLexicon lexicon = load_lexicon_dir(lexicon_dir_of(config));
  Trainer trainer(config, lexicon);
  std::ofstream metrics = open_out(dir / "metrics.jsonl");
  StepMetrics last;
  auto on_step = [&](const StepMetrics& m) {
    metrics << metrics_to_json(m) << "\n";
    last = m;
  };
  auto on_epoch = [&](const Trainer& t) {
    if (config.checkpoint_every_epochs > 0 && t.state().epoch % config.checkpoint_every_epochs == 0) {
      save_checkpoint({t.config(), t.state()}, dir / "checkpoint.xsng");
    }
  };
  try {
    trainer.run(on_step, -1, on_epoch);
  } catch (const NumericError& e) {
    metrics.flush();
    open_out(dir / "divergence.txt") << e.what() << "\n";
    save_checkpoint({trainer.config(), trainer.state()}, dir / "last_good.xsng");
    throw;
  }
  save_checkpoint({trainer.config(), trainer.state()}, dir / "checkpoint.xsng");
  out << "trained " << trainer.state().step << " steps over " << trainer.state().epoch << " epochs (seed "
      << config.seed << ")";
  if (trainer.state().step > 0) out << ", final mel L1 " << last.mel_l1;
  out << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& checkpoint_path, const std::string& score_path, const std::string& lang,
              int singer, const std::string& out_path, std::ostream& out) {
  require_file(checkpoint_path);
  require_file(score_path);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const Score score = load_score(score_path);
  const UnifiedLexicon lexicon = load_lexicon_dir(lexicon_dir_of(ck.config));
  const Language language = resolve_language(lang, score);
  const SequenceTriple seq = score_to_sequences(score, lexicon, language);
  validate(seq);
  const GeneratorConfig& gcfg = ck.config.generator;
  if (singer < 0 || static_cast<std::size_t>(singer) >= gcfg.singer_count) {
    throw ValidationError("singer " + std::to_string(singer) + " outside [0, " + std::to_string(gcfg.singer_count) + ")");
  }
  if (static_cast<std::size_t>(language_id(language)) >= gcfg.language_count) {
    throw ValidationError("language " + std::string(language_code(language)) + " was not trained");
  }
  Tape tape;
  const ParamBinding p(tape, ck.state.generator, false);
  const GeneratorOutput g = generator_forward(seq, language_id(language), singer, p, gcfg, Mode::Inference);
  const Tensor& mel = g.mel.value();
  if (!mel.all_finite()) throw NumericError("synthesized mel is not finite");
  nlohmann::ordered_json j;
  j["shape"] = mel.shape();
  j["data"] = mel.vec();
  open_out(out_path) << j.dump() << "\n";
  out << "wrote " << mel.dim(0) << " x " << mel.dim(1) << " mel to " << out_path << "\n";
  return kExitOk;
}

int cmd_gradcheck(const std::optional<std::string>& module, std::ostream& out) {
  double worst = 0.0, seconds = 0.0;
  for (const GradCheckCase& c : run_gradcheck_suite(module)) {
    worst = std::max(worst, c.result.max_relative_error);
    seconds += c.seconds;
    out << std::left << std::setw(16) << c.module << std::setw(22) << c.name << " max_rel_err "
        << std::scientific << std::setprecision(3) << c.result.max_relative_error << std::defaultfloat
        << "  coords " << c.result.coordinates_checked
        << (c.result.max_relative_error < kGradTolerance ? "  ok" : "  FAIL") << "\n";
  }
  out << "worst " << std::scientific << std::setprecision(3) << worst << std::defaultfloat << " in "
      << std::fixed << std::setprecision(2) << seconds << " s" << std::defaultfloat << "\n";
  return worst < kGradTolerance ? kExitOk : kExitNumeric;
}

int cmd_probe(const std::string& checkpoint_path, std::uint64_t corpus_seed, std::ostream& out) {
  require_file(checkpoint_path);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const UnifiedLexicon lexicon = load_lexicon_dir(lexicon_dir_of(ck.config));
  TrainConfig probe_cfg = ck.config;
  probe_cfg.corpus.items = ck.config.probe.items;
  const SyntheticCorpus corpus = make_synthetic_corpus(probe_cfg, lexicon, corpus_seed);
  const ProbeResult r = probe_eval(ck.state.generator, ck.config.generator, corpus, ck.config.probe, ck.config.seed);
  out << "probe_accuracy " << r.accuracy << " (" << r.held_out << " held-out items)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilingual singing-voice acoustic model: frontend, training, synthesis, checks", "xsng"};
  app.require_subcommand(1);

  std::string score_path, lang, lexicon_dir, out_path, config_path, out_dir, checkpoint_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> module;
  int singer = 0;
  std::uint64_t corpus_seed = 0;

  CLI::App* frontend = app.add_subcommand("frontend", "Convert a score to phoneme-level JSON");
  frontend->add_option("--score", score_path, "Score file (JSON lines)")->required();
  frontend->add_option("--lang", lang, "Conditioning language ZH|JA|EN (default: first sung note)");
  frontend->add_option("--lexicons,--lexicon-dir", lexicon_dir, "Directory with zh.tsv / ja.tsv / en.tsv");
  frontend->add_option("--out", out_path, "Write JSON here instead of stdout");

  CLI::App* train = app.add_subcommand("train", "Train from a JSON config");
  train->add_option("--config", config_path, "Training config (JSON)")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--seed", seed, "Seed; overrides XSNG_SEED and the config");

  CLI::App* synth = app.add_subcommand("synth", "Synthesize a mel-spectrogram");
  synth->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  synth->add_option("--score", score_path, "Score file (JSON lines)")->required();
  synth->add_option("--lang", lang, "Conditioning language ZH|JA|EN");
  synth->add_option("--singer", singer, "Singer index, 0-based")->required();
  synth->add_option("--out", out_path, "Output mel JSON")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");
  gradcheck->add_option("--module", module, "One of: ops, cln, block, eliminator, discriminators, generator");

  CLI::App* probe = app.add_subcommand("probe", "Measure singer information left in encoder outputs");
  probe->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  probe->add_option("--corpus-seed", corpus_seed, "Seed of the probe corpus")->required();

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*frontend) return cmd_frontend(score_path, lang, lexicon_dir, out_path, out);
    if (*train) return cmd_train(config_path, out_dir, seed, out);
    if (*synth) return cmd_synth(checkpoint_path, score_path, lang, singer, out_path, out);
    if (*gradcheck) return cmd_gradcheck(module, out);
    if (*probe) return cmd_probe(checkpoint_path, corpus_seed, out);
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingFile;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace xsng
