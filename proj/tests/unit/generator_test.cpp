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

#include <cmath>
#include <numeric>
#include <vector>

#include "xsng/error.hpp"
#include "xsng/generator.hpp"
#include "xsng/grad_check.hpp"
#include "xsng/ops.hpp"
#include "xsng/rng.hpp"

namespace xsng {
namespace {

Tensor random_tensor(Shape shape, std::uint64_t key, double sd = 1.0) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest);
  return Tensor::randn(std::move(shape), rng, sd);
}

SequenceTriple toy_sequence() { return {{1, 2, 3, 1}, {2, 1, 3, 2}, {60, 60, 62, 65}, 0, {0, 0, 1, 2}}; }

// Language-dependent CLN: random W's on top of the identity init.
ParamStore generic_params(const GeneratorConfig& c, std::uint64_t seed) {
  ParamStore p = init_generator_params(c, seed);
  p.at("gen.cln.w_alpha") = random_tensor({c.hidden_dim, c.hidden_dim}, seed + 1, 0.3);
  p.at("gen.cln.w_beta") = random_tensor({c.hidden_dim, c.hidden_dim}, seed + 2, 0.3);
  return p;
}

void zero_prefix(ParamStore& p, std::string_view prefix) {
  for (auto& [name, value] : p) {
    if (name.starts_with(prefix)) value.fill(0.0);
  }
}

GeneratorOutput forward(const ParamStore& store, const GeneratorConfig& c, const SequenceTriple& seq, int lang,
                        int singer, Tape& tape, Mode mode = Mode::Train) {
  const ParamBinding p(tape, store, false);
  return generator_forward(seq, lang, singer, p, c, mode, std::span<const int>(seq.note_durations));
}

TEST(GeneratorConfig, Validation) {
  GeneratorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.attention_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GeneratorConfig{};
  c.conv_kernel = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GeneratorConfig{};
  c.mel_bins = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(DurationBucket, LogSpacedEdges) {
  EXPECT_EQ(duration_bucket(1), 0);
  EXPECT_EQ(duration_bucket(5), 3);
  EXPECT_EQ(duration_bucket(6), 4);
  EXPECT_EQ(duration_bucket(64), 11);
  EXPECT_EQ(duration_bucket(1000), 11);
  EXPECT_THROW(duration_bucket(0), ContractError);
}

TEST(EmbedInputs, ZeroTablesGivePositionalEncoding) {
  const GeneratorConfig c;
  ParamStore store = init_generator_params(c, 1);
  zero_prefix(store, "gen.emb.");
  Tape tape;
  const ParamBinding p(tape, store);
  const SequenceTriple seq = toy_sequence();
  EXPECT_EQ(embed_inputs(seq, p, c).value(), sinusoidal_encoding(4, c.hidden_dim));
}

TEST(EmbedInputs, SingleStepShape) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 1);
  Tape tape;
  const ParamBinding p(tape, store);
  const SequenceTriple seq{{5}, {9}, {61}, 0, {0}};
  EXPECT_EQ(embed_inputs(seq, p, c).shape(), (Shape{1, c.hidden_dim}));
}

TEST(EmbedInputs, MatchesTableRowSum) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 2);
  Tape tape;
  const ParamBinding p(tape, store);
  const SequenceTriple seq = toy_sequence();
  const Tensor got = embed_inputs(seq, p, c).value();
  const Tensor& ph = store.at("gen.emb.phoneme");
  const Tensor& pi = store.at("gen.emb.pitch");
  const Tensor& du = store.at("gen.emb.duration");
  double worst = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    const int bucket = duration_bucket(seq.note_durations[t]);
    for (std::size_t j = 0; j < c.hidden_dim; ++j) {
      const double rate = std::pow(10000.0, -static_cast<double>(j - j % 2) / static_cast<double>(c.hidden_dim));
      const double pe = j % 2 == 0 ? std::sin(static_cast<double>(t) * rate) : std::cos(static_cast<double>(t) * rate);
      const double expect = ph.at(static_cast<std::size_t>(seq.phoneme_ids[t]), j) +
                            pi.at(static_cast<std::size_t>(seq.note_pitches[t]), j) +
                            du.at(static_cast<std::size_t>(bucket), j) + pe;
      worst = std::max(worst, std::abs(expect - got.at(t, j)));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(EmbedInputs, OutOfRangeIdIsLookupError) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 1);
  Tape tape;
  const ParamBinding p(tape, store);
  SequenceTriple seq = toy_sequence();
  seq.phoneme_ids[0] = 64;
  EXPECT_THROW(embed_inputs(seq, p, c), LookupError);
}

TEST(Cln, UnitScaleZeroBiasIsLayerNorm) {
  Tape tape;
  const Var x = tape.constant(random_tensor({5, 4}, 3));
  // e = [1, 0, 0, 0]; only row 0 of the W's matters.
  Tensor wa = random_tensor({4, 4}, 4), wb = random_tensor({4, 4}, 5);
  for (std::size_t j = 0; j < 4; ++j) {
    wa.at(0, j) = 1.0;
    wb.at(0, j) = 0.0;
  }
  const Var e = tape.constant(Tensor({1, 4}, std::vector<double>{1, 0, 0, 0}));
  const Tensor y = cln(x, e, tape.constant(wa), tape.constant(wb), 1e-5).value();
  EXPECT_EQ(y, layer_norm(x, 1e-5).y.value());
}

TEST(Cln, HandComputedSymmetricRow) {
  Tape tape;
  const Var x = tape.constant(Tensor::matrix({{1, -1}}));
  const Var e = tape.constant(Tensor::matrix({{1, 0}}));
  const Var wa = tape.constant(Tensor::matrix({{2, 2}, {0, 0}}));
  const Var wb = tape.constant(Tensor::matrix({{0.5, 0.5}, {0, 0}}));
  const Tensor y = cln(x, e, wa, wb, 1e-5).value();
  const double n = 1.0 / std::sqrt(1.0 + 1e-5);
  EXPECT_NEAR(y[0], 2.0 * n + 0.5, 1e-15);
  EXPECT_NEAR(y[1], -2.0 * n + 0.5, 1e-15);
  EXPECT_NEAR(y[0], 2.49999, 1e-5);
  EXPECT_NEAR(y[1], -1.49999, 1e-5);
}

TEST(Cln, MatchesLayerNormThenAffine) {
  const std::size_t d = 6;
  const Tensor x = random_tensor({4, d}, 6), e = random_tensor({1, d}, 7);
  const Tensor wa = random_tensor({d, d}, 8), wb = random_tensor({d, d}, 9);
  Tape tape;
  const Tensor y = cln(tape.constant(x), tape.constant(e), tape.constant(wa), tape.constant(wb), 1e-5).value();
  // Two-stage oracle written out by hand.
  std::vector<double> alpha(d, 0.0), beta(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      alpha[j] += e[k] * wa.at(k, j);
      beta[j] += e[k] * wb.at(k, j);
    }
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    double mu = 0.0, var = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += x.at(t, j) / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) var += (x.at(t, j) - mu) * (x.at(t, j) - mu) / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double expect = alpha[j] * (x.at(t, j) - mu) / std::sqrt(var + 1e-5) + beta[j];
      worst = std::max(worst, std::abs(expect - y.at(t, j)));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

// Epsilon is shrunk so the only gap left is rounding.
TEST(ClnProperty, InvariantToPositiveRowAffine) {
  CounterRng rng = CounterRng::derive(10, rng_stream::kTest);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 8;
    const Tensor x = Tensor::randn({3, d}, rng), e = Tensor::randn({1, d}, rng);
    const Tensor wa = Tensor::randn({d, d}, rng), wb = Tensor::randn({d, d}, rng);
    const double a = rng.uniform() * 10.0 + 0.5, b = rng.normal() * 5.0;
    Tensor shifted = x;
    for (double& v : shifted.data()) v = a * v + b;
    Tape tape;
    const auto run = [&](const Tensor& in) {
      return cln(tape.constant(in), tape.constant(e), tape.constant(wa), tape.constant(wb), 1e-14).value();
    };
    EXPECT_LT(max_abs_diff(run(x), run(shifted)), 1e-8) << "trial " << trial << " a=" << a;
  }
}

TEST(ConvFftBlock, ZeroWeightsCollapseToDoubleLayerNorm) {
  const GeneratorConfig c;
  ParamStore store = init_generator_params(c, 3);
  zero_prefix(store, "gen.enc.0.");
  Tape tape;
  const ParamBinding p(tape, store);
  const Var x = tape.constant(random_tensor({7, c.hidden_dim}, 11));
  const Tensor y = conv_fft_block(x, p, "gen.enc.0", c, nullptr).value();
  const Tensor expect = layer_norm(layer_norm(x, c.epsilon).y, c.epsilon).y.value();
  EXPECT_LT(max_abs_diff(y, expect), 1e-12);
}

TEST(ConvFftBlock, PreservesShape) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 3);
  Tape tape;
  const ParamBinding p(tape, store);
  const Var x = tape.constant(random_tensor({7, 64}, 12));
  EXPECT_EQ(conv_fft_block(x, p, "gen.dec.1", c, nullptr).shape(), (Shape{7, 64}));
}

TEST(ConvFftBlock, GradientWithRespectToClnScaleWeights) {
  GeneratorConfig c;
  c.hidden_dim = 8;
  c.ffn_dim = 16;
  const ParamStore store = generic_params(c, 4);
  const Tensor x_in = random_tensor({5, 8}, 13), r = random_tensor({5, 8}, 14);
  auto f = [&](Tape& tape, Var w_alpha) {
    ParamBinding p(tape, store);
    p.bind("gen.cln.w_alpha", w_alpha);
    const int lang[] = {1};
    const LanguageCondition cond{gather_rows(p["gen.emb.language"], lang), w_alpha, p["gen.cln.w_beta"]};
    return sum(mul(conv_fft_block(tape.constant(x_in), p, "gen.enc.0", c, &cond), tape.constant(r)));
  };
  EXPECT_LT(grad_check(f, store.at("gen.cln.w_alpha"), 1e-5).max_relative_error, 1e-4);
}

TEST(LengthRegulate, UnitDurationsAreIdentity) {
  Tape tape;
  const Tensor x = random_tensor({4, 3}, 15);
  const int d[] = {1, 1, 1, 1};
  EXPECT_EQ(length_regulate(tape.constant(x), d).value(), x);
}

TEST(LengthRegulate, RepeatsRowsInOrder) {
  Tape tape;
  const Tensor x = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  const int d[] = {2, 1, 3};
  EXPECT_EQ(length_regulate(tape.constant(x), d).value(),
            Tensor::matrix({{1, 2}, {1, 2}, {3, 4}, {5, 6}, {5, 6}, {5, 6}}));
}

TEST(LengthRegulateProperty, OutputLengthIsDurationSum) {
  CounterRng rng = CounterRng::derive(16, rng_stream::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = static_cast<std::size_t>(rng.uniform_int(1, 10));
    std::vector<int> d(t);
    for (int& v : d) v = static_cast<int>(rng.uniform_int(1, 9));
    Tape tape;
    const Var y = length_regulate(tape.constant(Tensor::randn({t, 2}, rng)), d);
    EXPECT_EQ(y.shape()[0], static_cast<std::size_t>(std::accumulate(d.begin(), d.end(), 0)));
  }
}

TEST(LengthRegulate, BadDurationsAreContractErrors) {
  Tape tape;
  const Var x = tape.constant(Tensor({2, 3}));
  const int zero[] = {1, 0};
  const int neg[] = {1, -2};
  const int short_list[] = {1};
  EXPECT_THROW(length_regulate(x, zero), ContractError);
  EXPECT_THROW(length_regulate(x, neg), ContractError);
  EXPECT_THROW(length_regulate(x, short_list), ContractError);
}

TEST(PredictDurations, ZeroHeadPredictsOneFrame) {
  const GeneratorConfig c;
  ParamStore store = init_generator_params(c, 5);
  zero_prefix(store, "gen.dur.");
  Tape tape;
  const ParamBinding p(tape, store);
  const Tensor log_dur = predict_durations(tape.constant(random_tensor({6, 64}, 17)), p, c).value();
  EXPECT_EQ(log_dur, Tensor({6}, 0.0));
  EXPECT_EQ(durations_from_log(log_dur), std::vector<int>(6, 1));
}

TEST(PredictDurations, InferenceRounding) {
  // exp(1.6) = 4.953 -> 5; exp(-3) < 0.5 -> floor of one frame.
  EXPECT_EQ(durations_from_log(Tensor::vector({1.6, -3.0, 0.0})), (std::vector<int>{5, 1, 1}));
  EXPECT_THROW(durations_from_log(Tensor::vector({NAN})), NumericError);
  EXPECT_THROW(durations_from_log(Tensor::vector({50.0})), NumericError);
}

TEST(PredictDurations, GradientMatchesFiniteDifferences) {
  GeneratorConfig c;
  c.hidden_dim = 8;
  const ParamStore store = init_generator_params(c, 6);
  const Tensor h = random_tensor({5, 8}, 18), r = random_tensor({5}, 19);
  auto f = [&](Tape& tape, Var w) {
    ParamBinding p(tape, store);
    p.bind("gen.dur.conv1.w", w);
    return sum(mul(predict_durations(tape.constant(h), p, c), tape.constant(r)));
  };
  // At h = 1e-5 one conv2 pre-activation crosses its ReLU kink.
  const GradCheckResult g = grad_check(f, store.at("gen.dur.conv1.w"), 1e-6);
  EXPECT_LT(g.max_relative_error, 1e-4) << g.worst_index << " " << g.analytic_at_worst << " " << g.numeric_at_worst;
}

TEST(GeneratorForward, OnePhonemeShape) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 7);
  Tape tape;
  const SequenceTriple seq{{3}, {4}, {60}, 0, {0}};
  const GeneratorOutput g = forward(store, c, seq, 0, 0, tape);
  EXPECT_EQ(g.mel.shape(), (Shape{4, c.mel_bins}));
  EXPECT_EQ(g.encoder_out.shape(), (Shape{1, c.hidden_dim}));
  EXPECT_EQ(g.predicted_log_dur.shape(), (Shape{1}));
}

TEST(GeneratorForward, LanguageChangesMelWhenClnIsActive) {
  const GeneratorConfig c;
  const ParamStore store = generic_params(c, 8);
  Tape tape;
  const SequenceTriple seq = toy_sequence();
  const Tensor a = forward(store, c, seq, 0, 1, tape).mel.value();
  const Tensor b = forward(store, c, seq, 2, 1, tape).mel.value();
  EXPECT_GT(max_abs_diff(a, b), 1e-6);
}

TEST(GeneratorForward, TrainingWithoutDurationsIsContractError) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 7);
  Tape tape;
  const ParamBinding p(tape, store);
  EXPECT_THROW(generator_forward(toy_sequence(), 0, 0, p, c, Mode::Train), ContractError);
  const int wrong[] = {1, 2};
  EXPECT_THROW(generator_forward(toy_sequence(), 0, 0, p, c, Mode::Train, std::span<const int>(wrong)),
               ContractError);
  EXPECT_THROW(generator_forward(toy_sequence(), 0, 3, p, c, Mode::Inference), LookupError);
}

TEST(GeneratorForward, FullGradientOnToyScore) {
  GeneratorConfig c;
  c.hidden_dim = 8;
  c.ffn_dim = 16;
  c.mel_bins = 4;
  c.phoneme_vocab = 6;
  const ParamStore store = generic_params(c, 9);
  const SequenceTriple seq = toy_sequence();
  const Tensor r = random_tensor({8, 4}, 20);
  // Check the phoneme table and the first encoder block's FFN together.
  auto f = [&](Tape& tape, Var table) {
    ParamBinding p(tape, store);
    p.bind("gen.emb.phoneme", table);
    const GeneratorOutput g = generator_forward(seq, 1, 2, p, c, Mode::Train, std::span<const int>(seq.note_durations));
    return add(sum(mul(g.mel, tape.constant(r))), sum(square(g.predicted_log_dur)));
  };
  EXPECT_LT(grad_check(f, store.at("gen.emb.phoneme"), 1e-5).max_relative_error, 1e-4);
}

TEST(GeneratorProperty, IdentityClnIsBitEqualToUnconditionedRun) {
  GeneratorConfig c;
  ParamStore store = generic_params(c, 10);
  // Every language row is e = [1, 0, ...]; row 0 of W_alpha is ones and of
  // W_beta zeros, so alpha = 1 and beta = 0 exactly.
  Tensor& lang = store.at("gen.emb.language");
  lang.fill(0.0);
  for (std::size_t l = 0; l < c.language_count; ++l) lang.at(l, 0) = 1.0;
  for (std::size_t j = 0; j < c.hidden_dim; ++j) {
    store.at("gen.cln.w_alpha").at(0, j) = 1.0;
    store.at("gen.cln.w_beta").at(0, j) = 0.0;
  }
  GeneratorConfig plain = c;
  plain.use_cln = false;
  const SequenceTriple seq = toy_sequence();
  for (int l = 0; l < 3; ++l) {
    Tape tape;
    EXPECT_EQ(forward(store, c, seq, l, 0, tape).mel.value(), forward(store, plain, seq, l, 0, tape).mel.value());
    EXPECT_EQ(forward(store, c, seq, l, 0, tape, Mode::Inference).mel.value(),
              forward(store, plain, seq, l, 0, tape, Mode::Inference).mel.value());
  }
}

TEST(GeneratorProperty, FreshInitIgnoresLanguage) {
  const GeneratorConfig c;
  const ParamStore store = init_generator_params(c, 11);
  Tape tape;
  const SequenceTriple seq = toy_sequence();
  const Tensor a = forward(store, c, seq, 0, 0, tape).mel.value();
  for (int l = 1; l < 3; ++l) EXPECT_LT(max_abs_diff(a, forward(store, c, seq, l, 0, tape).mel.value()), 1e-12);
}

TEST(GeneratorProperty, LanguageEntersOnlyAtTheFirstEncoderBlock) {
  const GeneratorConfig c;
  const ParamStore store = generic_params(c, 12);
  ParamStore zeroed = store;
  zero_prefix(zeroed, "gen.emb.language");
  const SequenceTriple seq = toy_sequence();
  Tape tape;
  const GeneratorOutput a = forward(store, c, seq, 1, 0, tape);
  const GeneratorOutput b = forward(zeroed, c, seq, 1, 0, tape);
  EXPECT_EQ(a.embedded.value(), b.embedded.value());
  EXPECT_GT(max_abs_diff(a.encoder_blocks[0].value(), b.encoder_blocks[0].value()), 1e-6);
  // With CLN off the language table is never read.
  GeneratorConfig plain = c;
  plain.use_cln = false;
  EXPECT_EQ(forward(store, plain, seq, 1, 0, tape).mel.value(), forward(zeroed, plain, seq, 1, 0, tape).mel.value());
}

TEST(GeneratorProperty, MelFramesEqualDurationSum) {
  const GeneratorConfig c;
  const ParamStore store = generic_params(c, 13);
  CounterRng rng = CounterRng::derive(21, rng_stream::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    SequenceTriple seq;
    const auto t = rng.uniform_int(1, 8);
    for (std::int64_t i = 0; i < t; ++i) {
      seq.phoneme_ids.push_back(static_cast<int>(rng.uniform_int(0, 48)));
      seq.note_durations.push_back(static_cast<int>(rng.uniform_int(1, 12)));
      seq.note_pitches.push_back(static_cast<int>(rng.uniform_int(0, 127)));
      seq.source_event.push_back(static_cast<int>(i));
    }
    Tape tape;
    const GeneratorOutput train = forward(store, c, seq, 0, 0, tape);
    EXPECT_EQ(train.mel.shape()[0], static_cast<std::size_t>(seq.total_frames()));
    const GeneratorOutput infer = forward(store, c, seq, 0, 0, tape, Mode::Inference);
    EXPECT_EQ(infer.mel.shape()[0],
              static_cast<std::size_t>(std::accumulate(infer.durations.begin(), infer.durations.end(), 0)));
    EXPECT_EQ(infer.durations, durations_from_log(infer.predicted_log_dur.value()));
  }
}

TEST(GeneratorProperty, SingerInjectedAfterEncoder) {
  const GeneratorConfig c;
  const ParamStore store = generic_params(c, 14);
  const SequenceTriple seq = toy_sequence();
  Tape tape;
  const GeneratorOutput a = forward(store, c, seq, 0, 0, tape);
  const GeneratorOutput b = forward(store, c, seq, 0, 2, tape);
  EXPECT_EQ(a.encoder_out.value(), b.encoder_out.value());
  EXPECT_GT(max_abs_diff(a.mel.value(), b.mel.value()), 1e-6);
  EXPECT_GT(max_abs_diff(a.predicted_log_dur.value(), b.predicted_log_dur.value()), 1e-9);
}

}  // namespace
}  // namespace xsng
