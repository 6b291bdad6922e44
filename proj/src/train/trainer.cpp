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

#include "xsng/train/trainer.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

#include "xsng/discriminators.hpp"
#include "xsng/eliminator.hpp"
#include "xsng/error.hpp"
#include "xsng/generator.hpp"
#include "xsng/ops.hpp"
#include "xsng/train/probe.hpp"

namespace xsng {
namespace {

constexpr double kDivergenceLimit = 1e6;
constexpr std::size_t kClassifierKernel = 3;

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

bool diverged(double v) { return !std::isfinite(v) || std::abs(v) > kDivergenceLimit; }

void require_same_layout(const ParamStore& expected, const ParamStore& given, const char* what) {
  if (expected.size() != given.size()) {
    throw ContractError(std::string("resume: ") + what + " has " + std::to_string(given.size()) +
                        " tensors, config expects " + std::to_string(expected.size()));
  }
  for (const auto& [name, value] : expected) {
    if (!given.contains(name) || given.at(name).shape() != value.shape()) {
      throw ContractError(std::string("resume: ") + what + " tensor '" + name + "' missing or reshaped");
    }
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TrainState init_train_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.generator = init_generator_params(config.generator, config.seed);
  s.generator.merge(init_classifier_params(config.generator.hidden_dim, config.generator.singer_count,
                                           kClassifierKernel, config.seed, "eliminator"));
  s.discriminator = init_discriminator_params(config.discriminator, config.seed);
  s.opt_g = make_adam_state(s.generator);
  s.opt_d = make_adam_state(s.discriminator);
  return s;
}

std::string metrics_to_json(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["epoch"] = m.epoch;
  j["lr"] = m.lr;
  j["L_a"] = m.acoustic;
  j["L_adv"] = optional_json(m.adversarial);
  j["L_f"] = optional_json(m.feature_match);
  j["L_s"] = optional_json(m.singer);
  j["d_loss"] = optional_json(m.d_loss);
  j["L_mel"] = m.mel_l1;
  j["L_dur"] = m.duration_mse;
  if (m.singer_clamped) j["singer_prob_clamped"] = true;
  if (m.probe_acc) j["probe_acc"] = *m.probe_acc;
  return j.dump();
}

Trainer::Trainer(TrainConfig config, UnifiedLexicon lexicon)
    : Trainer(config, std::move(lexicon), init_train_state(config)) {}

Trainer::Trainer(TrainConfig config, UnifiedLexicon lexicon, TrainState state)
    : config_(std::move(config)), lexicon_(std::move(lexicon)), state_(std::move(state)) {
  config_.validate();
  const TrainState fresh = init_train_state(config_);
  require_same_layout(fresh.generator, state_.generator, "generator");
  require_same_layout(fresh.discriminator, state_.discriminator, "discriminator");
  require_same_layout(fresh.generator, state_.opt_g.m, "generator optimizer");
  require_same_layout(fresh.generator, state_.opt_g.v, "generator optimizer");
  require_same_layout(fresh.discriminator, state_.opt_d.m, "discriminator optimizer");
  require_same_layout(fresh.discriminator, state_.opt_d.v, "discriminator optimizer");
  corpus_ = make_synthetic_corpus(config_, lexicon_, config_.seed);
  if (state_.batch_in_epoch < 0 || static_cast<std::size_t>(state_.batch_in_epoch) >= batches_per_epoch()) {
    throw ContractError("resume: batch position outside the epoch");
  }
}

std::size_t Trainer::batches_per_epoch() const {
  return (corpus_.items.size() + config_.batch_size - 1) / config_.batch_size;
}

std::vector<std::size_t> Trainer::batch_items(std::int64_t epoch, std::int64_t batch) const {
  std::vector<std::size_t> order(corpus_.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng = CounterRng::derive(config_.seed, rng_stream::kShuffle, static_cast<std::uint64_t>(epoch));
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t lo = static_cast<std::size_t>(batch) * config_.batch_size;
  const std::size_t hi = std::min(order.size(), lo + config_.batch_size);
  return {order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi)};
}

bool Trainer::finished() const {
  return state_.epoch >= config_.epochs || (config_.max_steps > 0 && state_.step >= config_.max_steps);
}

StepMetrics Trainer::step() {
  const GeneratorConfig& gcfg = config_.generator;
  const DiscriminatorConfig& dcfg = config_.discriminator;
  const LossWeights& w = config_.weights;
  const bool adversarial = w.adversarial > 0.0 || w.feature_match > 0.0;
  const bool eliminate = config_.use_eliminator && w.singer > 0.0;

  TrainState next = state_;
  if (next.step >= config_.schedule.warmup_steps && next.warmup_end_epoch < 0) next.warmup_end_epoch = next.epoch;
  StepMetrics m;
  m.step = next.step + 1;
  m.epoch = next.epoch;
  m.lr = lr_at(next.step, next.epoch, config_.schedule, std::max<std::int64_t>(next.warmup_end_epoch, 0));

  const std::vector<std::size_t> batch = batch_items(next.epoch, next.batch_in_epoch);

  Tape g_tape;
  const ParamBinding g_params(g_tape, next.generator);
  std::vector<GeneratorOutput> outs;
  outs.reserve(batch.size());
  for (const std::size_t i : batch) {
    const CorpusItem& item = corpus_.items[i];
    outs.push_back(generator_forward(item.seq, item.language_id, item.singer_id, g_params, gcfg, Mode::Train,
                                     std::span<const int>(item.seq.note_durations)));
  }

  std::vector<SegmentCrop> crops;
  CounterRng crop_rng = CounterRng::derive(config_.seed, rng_stream::kCrop, static_cast<std::uint64_t>(next.step));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    crops.push_back(draw_segment_crop(outs[b].mel.shape()[0], dcfg.segment_frames, crop_rng));
  }

  if (adversarial) {
    Tape d_tape;
    const ParamBinding d_params(d_tape, next.discriminator);
    std::vector<Var> losses;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto real = run_discriminators(d_tape.constant(corpus_.items[batch[b]].mel), d_params, dcfg, crops[b]);
      const auto fake = run_discriminators(d_tape.constant(outs[b].mel.value()), d_params, dcfg, crops[b]);
      losses.push_back(lsgan_d_loss(scores_of(real), scores_of(fake)));
    }
    const Var d_loss = average(losses);
    m.d_loss = d_loss.value().item();
    if (diverged(*m.d_loss)) {
      throw NumericError("training diverged: " + metrics_to_json(m));
    }
    adam_step(next.discriminator, d_params.gradients(d_tape.backward(d_loss)), next.opt_d, m.lr, config_.adam);
  }

  const ParamBinding frozen_d(g_tape, next.discriminator, false);
  std::vector<Var> totals;
  std::vector<double> acoustic, mel, dur, adv, fm, singer;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const CorpusItem& item = corpus_.items[batch[b]];
    const GeneratorOutput& out = outs[b];
    const AcousticLoss a = acoustic_loss(out.mel, item.mel, out.predicted_log_dur, item.seq.note_durations);
    LossParts parts{a.total, Var(), Var(), Var()};
    acoustic.push_back(a.total.value().item());
    mel.push_back(a.mel.value().item());
    dur.push_back(a.duration.value().item());
    if (adversarial) {
      const auto real = run_discriminators(g_tape.constant(item.mel), frozen_d, dcfg, crops[b]);
      const auto fake = run_discriminators(out.mel, frozen_d, dcfg, crops[b]);
      parts.adversarial = lsgan_g_loss(scores_of(fake));
      parts.feature_match = feature_match_loss(real, fake);
      adv.push_back(parts.adversarial.value().item());
      fm.push_back(parts.feature_match.value().item());
    }
    if (eliminate) {
      const Var probs = classify_singer(out.encoder_out, g_params, config_.grl.lambda_at(next.step));
      bool clamped = false;
      parts.singer = singer_loss(probs, item.singer_id, &clamped);
      m.singer_clamped = m.singer_clamped || clamped;
      singer.push_back(parts.singer.value().item());
    }
    LossWeights effective = w;
    if (!adversarial) effective.adversarial = effective.feature_match = 0.0;
    if (!eliminate) effective.singer = 0.0;
    try {
      totals.push_back(total_generator_loss(parts, effective));
    } catch (const NumericError& e) {
      throw NumericError(std::string("training diverged (") + e.what() + "): " + metrics_to_json(m));
    }
  }
  const Var total = average(totals);
  m.acoustic = mean_of(acoustic);
  m.mel_l1 = mean_of(mel);
  m.duration_mse = mean_of(dur);
  if (adversarial) {
    m.adversarial = mean_of(adv);
    m.feature_match = mean_of(fm);
  }
  if (eliminate) m.singer = mean_of(singer);
  if (diverged(total.value().item())) {
    throw NumericError("training diverged: " + metrics_to_json(m));
  }
  const double classifier_scale = config_.grl.classifier_lr_scale;
  adam_step(next.generator, g_params.gradients(g_tape.backward(total)), next.opt_g, m.lr, config_.adam,
            [classifier_scale](std::string_view name) {
              return name.starts_with("eliminator.") ? classifier_scale : 1.0;
            });

  ++next.step;
  if (static_cast<std::size_t>(++next.batch_in_epoch) == batches_per_epoch()) {
    next.batch_in_epoch = 0;
    ++next.epoch;
  }
  state_ = std::move(next);
  return m;
}

double Trainer::probe_now() {
  if (!probe_corpus_) {
    TrainConfig probe_cfg = config_;
    probe_cfg.corpus.items = config_.probe.items;
    probe_corpus_ = make_synthetic_corpus(probe_cfg, lexicon_, config_.probe_corpus_seed);
  }
  return probe_eval(state_.generator, config_.generator, *probe_corpus_, config_.probe, config_.seed).accuracy;
}

void Trainer::run(const std::function<void(const StepMetrics&)>& on_step, std::int64_t max_steps,
                  const std::function<void(const Trainer&)>& on_epoch_end) {
  std::int64_t taken = 0;
  while (!finished() && (max_steps < 0 || taken < max_steps)) {
    const std::int64_t epoch_before = state_.epoch;
    StepMetrics m = step();
    ++taken;
    const bool epoch_done = state_.epoch != epoch_before;
    if (epoch_done && config_.probe_every_epochs > 0 && state_.epoch % config_.probe_every_epochs == 0) {
      m.probe_acc = probe_now();
    }
    if (on_step) on_step(m);
    if (epoch_done && on_epoch_end) on_epoch_end(*this);
  }
}

}  // namespace xsng
