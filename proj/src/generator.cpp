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

#include "xsng/generator.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "xsng/error.hpp"
#include "xsng/ops.hpp"
#include "xsng/rng.hpp"

namespace xsng {
namespace {

Tensor scaled_normal(Shape shape, CounterRng& rng, std::size_t fan_in) {
  return Tensor::randn(std::move(shape), rng, 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

void add_block_params(ParamStore& store, const std::string& prefix, const GeneratorConfig& c,
                      CounterRng& rng) {
  const std::size_t d = c.hidden_dim;
  for (const char* m : {"q", "k", "v", "o"}) {
    store.add(prefix + ".attn.w" + m, scaled_normal({d, d}, rng, d));
    store.add(prefix + ".attn.b" + m, Tensor({d}));
  }
  for (std::size_t b = 0; b < c.parallel_conv_branches; ++b) {
    const std::string name = prefix + ".conv." + std::to_string(b);
    store.add(name + ".w", scaled_normal({d, d, c.conv_kernel}, rng, d * c.conv_kernel));
    store.add(name + ".b", Tensor({d}));
  }
  store.add(prefix + ".ffn.w1", scaled_normal({d, c.ffn_dim}, rng, d));
  store.add(prefix + ".ffn.b1", Tensor({c.ffn_dim}));
  store.add(prefix + ".ffn.w2", scaled_normal({c.ffn_dim, d}, rng, c.ffn_dim));
  store.add(prefix + ".ffn.b2", Tensor({d}));
}

Var linear(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

Var multi_head_attention(Var x, const ParamBinding& p, const std::string& prefix,
                         const GeneratorConfig& c) {
  const Var q = linear(x, p[prefix + ".attn.wq"], p[prefix + ".attn.bq"]);
  const Var k = linear(x, p[prefix + ".attn.wk"], p[prefix + ".attn.bk"]);
  const Var v = linear(x, p[prefix + ".attn.wv"], p[prefix + ".attn.bv"]);
  const std::size_t dh = c.hidden_dim / c.attention_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> heads;
  heads.reserve(c.attention_heads);
  for (std::size_t h = 0; h < c.attention_heads; ++h) {
    const std::size_t lo = h * dh, hi = lo + dh;
    const Var scores = scale(matmul_nt(slice_cols(q, lo, hi), slice_cols(k, lo, hi)), inv_sqrt);
    heads.push_back(matmul(softmax_rows(scores), slice_cols(v, lo, hi)));
  }
  const Var joined = c.attention_heads == 1 ? heads.front() : concat_cols(heads);
  return linear(joined, p[prefix + ".attn.wo"], p[prefix + ".attn.bo"]);
}

}  // namespace

void GeneratorConfig::validate() const {
  const std::pair<const char*, std::size_t> sizes[] = {
      {"hidden_dim", hidden_dim}, {"encoder_blocks", encoder_blocks},
      {"decoder_blocks", decoder_blocks}, {"attention_heads", attention_heads},
      {"ffn_dim", ffn_dim}, {"conv_kernel", conv_kernel},
      {"parallel_conv_branches", parallel_conv_branches}, {"mel_bins", mel_bins},
      {"phoneme_vocab", phoneme_vocab}, {"pitch_vocab", pitch_vocab},
      {"duration_bucket_vocab", duration_bucket_vocab}, {"language_count", language_count},
      {"singer_count", singer_count}};
  for (const auto& [name, value] : sizes) {
    if (value == 0) throw ConfigError(std::string("generator: ") + name + " must be >= 1");
  }
  if (hidden_dim % attention_heads != 0) {
    throw ConfigError("generator: hidden_dim " + std::to_string(hidden_dim) +
                      " not divisible by attention_heads " + std::to_string(attention_heads));
  }
  if (conv_kernel % 2 == 0) throw ConfigError("generator: conv_kernel must be odd");
  if (duration_bucket_vocab < kDurationBucketEdges.size()) {
    throw ConfigError("generator: duration_bucket_vocab must be >= " +
                      std::to_string(kDurationBucketEdges.size()));
  }
  if (!(epsilon > 0.0)) throw ConfigError("generator: epsilon must be > 0");
}

int duration_bucket(int frames) {
  if (frames < 1) throw ContractError("duration_bucket: frames must be >= 1, got " + std::to_string(frames));
  int bucket = 0;
  for (std::size_t i = 0; i < kDurationBucketEdges.size(); ++i) {
    if (kDurationBucketEdges[i] <= frames) bucket = static_cast<int>(i);
  }
  return bucket;
}

Tensor sinusoidal_encoding(std::size_t length, std::size_t dim) {
  Tensor pe({length, dim});
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double rate = std::pow(10000.0, -static_cast<double>(j - j % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(t) * rate;
      pe.at(t, j) = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

namespace {

struct ClnInit {
  Tensor language, w_alpha, w_beta;
};

// Random language rows E with W_alpha = pinv(E) * 1 + (I - P) N and
// W_beta = (I - P) N', P the projector onto the row space of E. Every
// language then starts with alpha = 1, beta = 0, while the weights stay
// generic and language rows can drift apart once training moves them.
ClnInit identity_cln_init(std::size_t languages, std::size_t d, CounterRng& rng) {
  ClnInit out{Tensor::randn({languages, d}, rng, 0.5), Tensor({d, d}), Tensor({d, d})};
  const Tensor& e = out.language;
  // Gram matrix G = E E^T, inverted by Gauss-Jordan (languages is tiny).
  const std::size_t n = languages;
  std::vector<double> g(n * 2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += e.at(i, k) * e.at(j, k);
      g[i * 2 * n + j] = acc;
    }
    g[i * 2 * n + n + i] = 1.0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(g[r * 2 * n + col]) > std::abs(g[pivot * 2 * n + col])) pivot = r;
    }
    if (std::abs(g[pivot * 2 * n + col]) < 1e-12) throw NumericError("cln init: language rows are degenerate");
    for (std::size_t k = 0; k < 2 * n; ++k) std::swap(g[col * 2 * n + k], g[pivot * 2 * n + k]);
    const double inv = 1.0 / g[col * 2 * n + col];
    for (std::size_t k = 0; k < 2 * n; ++k) g[col * 2 * n + k] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = g[r * 2 * n + col];
      for (std::size_t k = 0; k < 2 * n; ++k) g[r * 2 * n + k] -= f * g[col * 2 * n + k];
    }
  }
  // pinv(E) = E^T G^-1, a d x n matrix.
  Tensor pinv({d, n});
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += e.at(i, k) * g[i * 2 * n + n + j];
      pinv.at(k, j) = acc;
    }
  }
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (Tensor* w : {&out.w_alpha, &out.w_beta}) {
    const Tensor noise = Tensor::randn({d, d}, rng, sd);
    // E N, then N - pinv(E) (E N).
    std::vector<double> en(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t col = 0; col < d; ++col) en[i * d + col] += e.at(i, k) * noise.at(k, col);
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t col = 0; col < d; ++col) {
        double acc = noise.at(k, col);
        for (std::size_t i = 0; i < n; ++i) acc -= pinv.at(k, i) * en[i * d + col];
        w->at(k, col) = acc;
      }
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    double row = 0.0;
    for (std::size_t i = 0; i < n; ++i) row += pinv.at(k, i);
    for (std::size_t col = 0; col < d; ++col) out.w_alpha.at(k, col) += row;
  }
  return out;
}

}  // namespace

ParamStore init_generator_params(const GeneratorConfig& c, std::uint64_t seed) {
  c.validate();
  CounterRng rng = CounterRng::derive(seed, rng_stream::kInit, 0);
  const std::size_t d = c.hidden_dim;
  ParamStore store;
  store.add("gen.emb.phoneme", Tensor::randn({c.phoneme_vocab, d}, rng, 0.5));
  store.add("gen.emb.pitch", Tensor::randn({c.pitch_vocab, d}, rng, 0.5));
  store.add("gen.emb.duration", Tensor::randn({c.duration_bucket_vocab, d}, rng, 0.5));
  store.add("gen.emb.singer", Tensor::randn({c.singer_count, d}, rng, 0.5));
  ClnInit cln = identity_cln_init(c.language_count, d, rng);
  store.add("gen.emb.language", std::move(cln.language));
  store.add("gen.cln.w_alpha", std::move(cln.w_alpha));
  store.add("gen.cln.w_beta", std::move(cln.w_beta));
  for (std::size_t i = 0; i < c.encoder_blocks; ++i) add_block_params(store, "gen.enc." + std::to_string(i), c, rng);
  for (std::size_t i = 0; i < c.decoder_blocks; ++i) add_block_params(store, "gen.dec." + std::to_string(i), c, rng);
  for (const char* layer : {"conv1", "conv2"}) {
    store.add(std::string("gen.dur.") + layer + ".w", scaled_normal({d, d, c.conv_kernel}, rng, d * c.conv_kernel));
    store.add(std::string("gen.dur.") + layer + ".b", Tensor({d}));
  }
  store.add("gen.dur.out.w", scaled_normal({d, 1}, rng, d));
  store.add("gen.dur.out.b", Tensor({1}));
  store.add("gen.mel.w", scaled_normal({d, c.mel_bins}, rng, d));
  store.add("gen.mel.b", Tensor({c.mel_bins}));
  return store;
}

Var embed_inputs(const SequenceTriple& seq, const ParamBinding& p, const GeneratorConfig& c) {
  if (seq.size() == 0) throw ContractError("embed_inputs: empty sequence");
  std::vector<int> buckets;
  buckets.reserve(seq.size());
  for (const int frames : seq.note_durations) buckets.push_back(duration_bucket(frames));
  Var x = gather_rows(p["gen.emb.phoneme"], seq.phoneme_ids);
  x = add(x, gather_rows(p["gen.emb.pitch"], seq.note_pitches));
  x = add(x, gather_rows(p["gen.emb.duration"], buckets));
  return add(x, p.tape().constant(sinusoidal_encoding(seq.size(), c.hidden_dim)));
}

Var cln(Var x, Var e, Var w_alpha, Var w_beta, double epsilon) {
  const std::size_t d = x.shape().back();
  const Var e_row = reshape(e, {1, d});
  const Var alpha = matmul(e_row, w_alpha);
  const Var beta = matmul(e_row, w_beta);
  return add_row(mul_row(layer_norm(x, epsilon).y, alpha), beta);
}

Var conv_fft_block(Var x, const ParamBinding& p, const std::string& prefix,
                   const GeneratorConfig& c, const LanguageCondition* condition) {
  Var sum = add(x, multi_head_attention(x, p, prefix, c));
  for (std::size_t b = 0; b < c.parallel_conv_branches; ++b) {
    const std::string name = prefix + ".conv." + std::to_string(b);
    sum = add(sum, relu(add_row(conv1d_time_major(x, p[name + ".w"], Padding::Same), p[name + ".b"])));
  }
  const Var y1 = layer_norm(sum, c.epsilon).y;
  const Var hidden = relu(linear(y1, p[prefix + ".ffn.w1"], p[prefix + ".ffn.b1"]));
  const Var y2 = add(y1, linear(hidden, p[prefix + ".ffn.w2"], p[prefix + ".ffn.b2"]));
  if (condition != nullptr) {
    return cln(y2, condition->embedding, condition->w_alpha, condition->w_beta, c.epsilon);
  }
  return layer_norm(y2, c.epsilon).y;
}

Var length_regulate(Var x, std::span<const int> durations) {
  if (x.shape().size() != 2 || durations.size() != x.shape()[0]) {
    throw ContractError("length_regulate: " + std::to_string(durations.size()) +
                        " durations for input " + to_string(x.shape()));
  }
  std::vector<int> rows;
  for (std::size_t t = 0; t < durations.size(); ++t) {
    if (durations[t] < 1) {
      throw ContractError("length_regulate: duration " + std::to_string(durations[t]) +
                          " at position " + std::to_string(t));
    }
    rows.insert(rows.end(), static_cast<std::size_t>(durations[t]), static_cast<int>(t));
  }
  return gather_rows(x, rows);
}

Var predict_durations(Var h, const ParamBinding& p, const GeneratorConfig&) {
  Var y = h;
  for (const char* layer : {"conv1", "conv2"}) {
    const std::string name = std::string("gen.dur.") + layer;
    y = relu(add_row(conv1d_time_major(y, p[name + ".w"], Padding::Same), p[name + ".b"]));
  }
  const Var out = linear(y, p["gen.dur.out.w"], p["gen.dur.out.b"]);
  return reshape(out, {out.shape()[0]});
}

std::vector<int> durations_from_log(const Tensor& log_frames) {
  std::vector<int> out;
  out.reserve(log_frames.size());
  for (std::size_t i = 0; i < log_frames.size(); ++i) {
    const double frames = std::round(std::exp(log_frames[i]));
    if (!std::isfinite(frames) || frames > kMaxPredictedFrames) {
      throw NumericError("predicted duration at phoneme " + std::to_string(i) + " is " +
                         std::to_string(frames) + " frames");
    }
    out.push_back(std::max(1, static_cast<int>(frames)));
  }
  return out;
}

GeneratorOutput generator_forward(const SequenceTriple& seq, int language_id, int singer_id,
                                  const ParamBinding& p, const GeneratorConfig& c, Mode mode,
                                  std::optional<std::span<const int>> ground_truth_durations) {
  if (mode == Mode::Train) {
    if (!ground_truth_durations) throw ContractError("generator_forward: training mode needs ground-truth durations");
    if (ground_truth_durations->size() != seq.size()) {
      throw ContractError("generator_forward: " + std::to_string(ground_truth_durations->size()) +
                          " durations for " + std::to_string(seq.size()) + " phonemes");
    }
  }
  GeneratorOutput out;
  out.embedded = embed_inputs(seq, p, c);

  Var x = out.embedded;
  for (std::size_t i = 0; i < c.encoder_blocks; ++i) {
    std::optional<LanguageCondition> condition;
    if (i == 0 && c.use_cln) {
      const int lang[] = {language_id};
      condition = LanguageCondition{gather_rows(p["gen.emb.language"], lang), p["gen.cln.w_alpha"],
                                    p["gen.cln.w_beta"]};
    }
    x = conv_fft_block(x, p, "gen.enc." + std::to_string(i), c, condition ? &*condition : nullptr);
    out.encoder_blocks.push_back(x);
  }
  out.encoder_out = x;

  const int singer[] = {singer_id};
  const Var h = add_row(out.encoder_out, gather_rows(p["gen.emb.singer"], singer));
  out.predicted_log_dur = predict_durations(h, p, c);
  if (mode == Mode::Train) {
    out.durations.assign(ground_truth_durations->begin(), ground_truth_durations->end());
  } else {
    out.durations = durations_from_log(out.predicted_log_dur.value());
  }

  Var frames = length_regulate(h, out.durations);
  frames = add(frames, p.tape().constant(sinusoidal_encoding(frames.shape()[0], c.hidden_dim)));
  for (std::size_t i = 0; i < c.decoder_blocks; ++i) {
    frames = conv_fft_block(frames, p, "gen.dec." + std::to_string(i), c, nullptr);
  }
  out.mel = linear(frames, p["gen.mel.w"], p["gen.mel.b"]);
  return out;
}

}  // namespace xsng
