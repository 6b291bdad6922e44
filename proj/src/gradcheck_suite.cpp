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

#include "xsng/gradcheck_suite.hpp"

#include <algorithm>
#include <chrono>

#include "xsng/discriminators.hpp"
#include "xsng/eliminator.hpp"
#include "xsng/error.hpp"
#include "xsng/generator.hpp"
#include "xsng/ops.hpp"
#include "xsng/params.hpp"
#include "xsng/rng.hpp"

namespace xsng {
namespace {

using Graph = std::function<Var(const ParamBinding&)>;

// sum(y * R) with R drawn from a fixed key, so every evaluation projects
// onto the same random direction.
Var project(Var y, std::uint64_t key) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest, 0);
  return sum(mul(y, y.tape().constant(Tensor::randn(y.shape(), rng))));
}

Tensor random(Shape shape, std::uint64_t key, double stddev = 1.0) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest, 1);
  return Tensor::randn(std::move(shape), rng, stddev);
}

// Checks d graph / d (every entry of `store` accepted by `checked`).
GradCheckResult check_params(const ParamStore& store, const std::function<bool(const std::string&)>& checked,
                             const Graph& graph, double h) {
  std::vector<std::string> names;
  std::vector<double> flat;
  for (const auto& [name, value] : store) {
    if (!checked(name)) continue;
    names.push_back(name);
    flat.insert(flat.end(), value.data().begin(), value.data().end());
  }
  const ScalarGraph f = [&](Tape& tape, Var x) {
    ParamBinding p(tape, store, false);
    const Var row = reshape(x, {1, x.value().size()});
    std::size_t offset = 0;
    for (const std::string& name : names) {
      const Tensor& value = store.at(name);
      p.bind(name, reshape(slice_cols(row, offset, offset + value.size()), value.shape()));
      offset += value.size();
    }
    return graph(p);
  };
  const std::size_t n = flat.size();
  return grad_check(f, Tensor({n}, std::move(flat)), h);
}

bool all(const std::string&) { return true; }

// Perturbs every tensor so no parameter sits at a special value (zero
// biases, identity CLN) while checking.
ParamStore jitter(ParamStore store, std::uint64_t key, double stddev) {
  CounterRng rng = CounterRng::derive(key, rng_stream::kTest, 2);
  for (auto& [name, value] : store) {
    for (double& v : value.data()) v += stddev * rng.normal();
  }
  return store;
}

GeneratorConfig tiny_generator() {
  GeneratorConfig c;
  c.hidden_dim = 8;
  c.attention_heads = 2;
  c.ffn_dim = 16;
  c.mel_bins = 4;
  c.phoneme_vocab = 6;
  c.singer_count = 3;
  return c;
}

SequenceTriple toy_score() {
  SequenceTriple seq;
  seq.phoneme_ids = {1, 2, 3, 1};
  seq.note_durations = {2, 1, 3, 2};
  seq.note_pitches = {60, 60, 62, 65};
  seq.language_id = 1;
  seq.source_event = {0, 0, 1, 2};
  return seq;
}

// Attention key biases shift every score of a query row equally, which
// softmax ignores; their gradient is identically zero and a relative-error
// check on them measures only rounding noise.
bool not_key_bias(const std::string& name) { return !name.ends_with(".attn.bk"); }

struct Case {
  const char* module;
  const char* name;
  std::function<GradCheckResult(double h)> run;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  auto op = [&out](const char* name, ParamStore store, Graph graph) {
    out.push_back({"ops", name, [store = std::move(store), graph = std::move(graph)](double h) {
                     return check_params(store, all, graph, h);
                   }});
  };
  auto store_of = [](std::initializer_list<std::pair<const char*, Tensor>> entries) {
    ParamStore s;
    for (const auto& [n, t] : entries) s.add(n, t);
    return s;
  };

  op("matmul", store_of({{"a", random({5, 4}, 1)}, {"b", random({4, 3}, 2)}}),
     [](const ParamBinding& p) { return project(matmul(p["a"], p["b"]), 10); });
  op("matmul_nt", store_of({{"a", random({5, 4}, 3)}, {"b", random({3, 4}, 4)}}),
     [](const ParamBinding& p) { return project(matmul_nt(p["a"], p["b"]), 11); });
  op("transpose+reshape", store_of({{"a", random({3, 4}, 5)}}),
     [](const ParamBinding& p) { return project(reshape(transpose(p["a"]), {2, 6}), 12); });
  op("conv1d.same", store_of({{"x", random({2, 8}, 6)}, {"w", random({3, 2, 3}, 7)}}),
     [](const ParamBinding& p) { return project(conv1d(p["x"], p["w"], Padding::Same), 13); });
  op("conv1d.valid", store_of({{"x", random({2, 8}, 8)}, {"w", random({3, 2, 5}, 9)}}),
     [](const ParamBinding& p) { return project(conv1d(p["x"], p["w"], Padding::Valid), 14); });
  op("conv1d_time_major", store_of({{"x", random({7, 3}, 15)}, {"w", random({2, 3, 3}, 16)}}),
     [](const ParamBinding& p) { return project(conv1d_time_major(p["x"], p["w"], Padding::Same), 17); });
  op("conv2d", store_of({{"x", random({2, 5, 6}, 18)}, {"w", random({3, 2, 3, 3}, 19)}}),
     [](const ParamBinding& p) { return project(conv2d(p["x"], p["w"]), 20); });
  op("layer_norm", store_of({{"x", random({4, 6}, 21)}}),
     [](const ParamBinding& p) { return project(layer_norm(p["x"], 1e-5).y, 22); });
  op("softmax", store_of({{"x", random({6}, 23)}}),
     [](const ParamBinding& p) { return project(softmax(p["x"]), 24); });
  op("softmax_rows", store_of({{"x", random({3, 5}, 25)}}),
     [](const ParamBinding& p) { return project(softmax_rows(p["x"]), 26); });
  op("neg_log_pick", store_of({{"x", random({5}, 27)}}),
     [](const ParamBinding& p) { return neg_log_pick(softmax(p["x"]), 2); });
  op("elementwise", store_of({{"a", random({3, 4}, 28)}, {"b", random({3, 4}, 29)}}),
     [](const ParamBinding& p) {
       const Var a = p["a"], b = p["b"];
       Var y = add(mul(a, b), sub(exp(scale(a, 0.5)), square(b)));
       y = add(y, log(add_scalar(square(a), 1.0)));
       y = add(y, add(relu(a), leaky_relu(b, 0.2)));
       return add(project(y, 30), project(abs(b), 31));
     });
  op("broadcast", store_of({{"a", random({4, 3}, 32)}, {"r", random({3}, 33)}, {"c", random({2}, 34)},
                            {"z", random({2, 3, 2}, 35)}}),
     [](const ParamBinding& p) {
       const Var y = mul_row(add_row(p["a"], p["r"]), p["r"]);
       return add(add(project(y, 36), project(mean_rows(y), 37)),
                  add(project(add_channel(p["z"], p["c"]), 38), scale(mean(p["a"]), 3.0)));
     });
  op("indexing", store_of({{"t", random({5, 3}, 39)}, {"u", random({2, 3}, 40)}}),
     [](const ParamBinding& p) {
       const int ids[] = {4, 0, 4, 2};
       const Var g = gather_rows(p["t"], ids);
       const Var rows[] = {slice_rows(g, 1, 3), p["u"]};
       const Var cols[] = {slice_cols(p["t"], 0, 2), slice_cols(p["t"], 1, 3)};
       return add(project(concat_rows(rows), 41), project(concat_cols(cols), 42));
     });

  out.push_back({"cln", "cln", [](double h) {
                   ParamStore s;
                   s.add("x", random({5, 6}, 50));
                   s.add("e", random({6}, 51));
                   s.add("w_alpha", random({6, 6}, 52, 0.5));
                   s.add("w_beta", random({6, 6}, 53, 0.5));
                   return check_params(s, all, [](const ParamBinding& p) {
                     return project(cln(p["x"], p["e"], p["w_alpha"], p["w_beta"], 1e-5), 54);
                   }, h);
                 }});

  out.push_back({"block", "conv_fft_block+cln", [](double h) {
                   const GeneratorConfig c = tiny_generator();
                   ParamStore s = jitter(init_generator_params(c, 60), 61, 0.2);
                   s.add("x", random({5, c.hidden_dim}, 62));
                   s.add("e", random({1, c.hidden_dim}, 63));
                   auto checked = [](const std::string& n) {
                     return n == "x" || n == "e" || n.starts_with("gen.cln.") ||
                            (n.starts_with("gen.enc.0.") && not_key_bias(n));
                   };
                   return check_params(s, checked, [c](const ParamBinding& p) {
                     const LanguageCondition cond{p["e"], p["gen.cln.w_alpha"], p["gen.cln.w_beta"]};
                     return project(conv_fft_block(p["x"], p, "gen.enc.0", c, &cond), 64);
                   }, h);
                 }});

  out.push_back({"eliminator", "classifier", [](double h) {
                   ParamStore s = jitter(init_classifier_params(6, 3, 3, 70), 71, 0.1);
                   s.add("x", random({5, 6}, 72));
                   return check_params(s, all, [](const ParamBinding& p) {
                     const Var probs = classify_singer(p["x"], p, std::nullopt);
                     return add(singer_loss(probs, 1), project(probs, 73));
                   }, h);
                 }});

  out.push_back({"discriminators", "critic", [](double h) {
                   DiscriminatorConfig c;
                   c.channels = 3;
                   ParamStore s = jitter(init_discriminator_params(c, 80).subset("disc.detail.0."), 81, 0.1);
                   s.add("x", random({6, 5}, 82));
                   return check_params(s, all, [c](const ParamBinding& p) {
                     const CriticOutput o = disc_forward(p["x"], p, "disc.detail.0", c);
                     Var loss = project(o.score, 83);
                     for (std::size_t l = 0; l < o.features.size(); ++l) loss = add(loss, project(o.features[l], 84 + l));
                     return loss;
                   }, h);
                 }});
  out.push_back({"discriminators", "adversarial losses", [](double h) {
                   DiscriminatorConfig c;
                   c.channels = 3;
                   c.segment_frames = 5;
                   ParamStore s = jitter(init_discriminator_params(c, 90), 91, 0.1);
                   s.add("fake", random({8, 6}, 92));
                   const Tensor real = random({8, 6}, 93);
                   return check_params(s, all, [c, real](const ParamBinding& p) {
                     const SegmentCrop crop{2, 5};
                     const auto r = run_discriminators(p.tape().constant(real), p, c, crop);
                     const auto f = run_discriminators(p["fake"], p, c, crop);
                     const auto rs = scores_of(r), fs = scores_of(f);
                     return add(add(lsgan_d_loss(rs, fs), lsgan_g_loss(fs)), feature_match_loss(r, f));
                   }, h);
                 }});

  out.push_back({"generator", "full generator", [](double h) {
                   const GeneratorConfig c = tiny_generator();
                   const ParamStore s = jitter(init_generator_params(c, 100), 101, 0.2);
                   return check_params(s, not_key_bias, [c](const ParamBinding& p) {
                     const SequenceTriple seq = toy_score();
                     const GeneratorOutput g = generator_forward(seq, 1, 2, p, c, Mode::Train,
                                                                 std::span<const int>(seq.note_durations));
                     return add(project(g.mel, 102), project(g.predicted_log_dur, 103));
                   }, h);
                 }});
  out.push_back({"generator", "acoustic loss", [](double h) {
                   const GeneratorConfig c = tiny_generator();
                   const ParamStore s = jitter(init_generator_params(c, 110), 111, 0.2);
                   // An odd frame count keeps every L1 sign sum, and so every
                   // bias gradient, away from an exact zero.
                   SequenceTriple seq = toy_score();
                   seq.note_durations.back() = 3;
                   const Tensor target = random({9, c.mel_bins}, 112);
                   auto checked = [](const std::string& n) { return not_key_bias(n) && (n.starts_with("gen.dec.1.") || n.starts_with("gen.mel.") || n.starts_with("gen.dur.")); };
                   return check_params(s, checked, [c, seq, target](const ParamBinding& p) {
                     const GeneratorOutput g = generator_forward(seq, 0, 0, p, c, Mode::Train,
                                                                 std::span<const int>(seq.note_durations));
                     return acoustic_loss(g.mel, target, g.predicted_log_dur, seq.note_durations).total;
                   }, h);
                 }});
  return out;
}

}  // namespace

std::vector<std::string> gradcheck_modules() {
  return {"ops", "cln", "block", "eliminator", "discriminators", "generator"};
}

std::vector<GradCheckCase> run_gradcheck_suite(const std::optional<std::string>& module, double h) {
  if (module) {
    const auto names = gradcheck_modules();
    if (std::find(names.begin(), names.end(), *module) == names.end()) {
      throw ConfigError("unknown gradcheck module '" + *module + "'");
    }
  }
  std::vector<GradCheckCase> results;
  for (const Case& c : cases()) {
    if (module && *module != c.module) continue;
    const auto start = std::chrono::steady_clock::now();
    GradCheckCase r{c.module, c.name, c.run(h), 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace xsng
