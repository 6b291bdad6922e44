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

// Differentiable tensor operations. Every function records one node on the
// tape of its inputs. No general broadcasting: the only mixed-shape forms are
// scalar * tensor, row-vector broadcast over matrix rows and per-channel bias.

#pragma once

#include <span>
#include <vector>

#include "xsng/tape.hpp"

namespace xsng {

enum class Padding { Same, Valid };

// Linear algebra ------------------------------------------------------------

/// [m x k] * [k x n] -> [m x n].
Var matmul(Var a, Var b);
/// [m x k] * [n x k]^T -> [m x n].
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

// Elementwise ---------------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
/// a[m x n] + b[n] on every row.
Var add_row(Var a, Var b);
/// a[m x n] * b[n] on every row.
Var mul_row(Var a, Var b);
/// a[C x ...] + b[C] on every element of channel c.
Var add_channel(Var a, Var b);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var exp(Var a);
Var log(Var a);
Var abs(Var a);
Var square(Var a);

// Reductions ----------------------------------------------------------------

Var sum(Var a);
Var mean(Var a);
/// Mean over the rows of a matrix: [m x n] -> [n].
Var mean_rows(Var a);
/// Arithmetic mean of equally shaped values.
Var average(std::span<const Var> parts);

// Normalization and probabilities -------------------------------------------

/// 1-D softmax with max subtraction.
Var softmax(Var a);
/// Softmax of each row of a matrix.
Var softmax_rows(Var a);

struct LayerNormResult {
  Var y;
  /// Per-vector statistics over the last axis; shapes are the leading dims.
  Tensor mean;
  Tensor stddev;
};

/// Normalizes each vector along the last axis: (x - mu) / sqrt(var + eps)
/// with population variance. No learned gain or bias.
LayerNormResult layer_norm(Var x, double epsilon);

/// -log(max(p[index], floor)). `clamped` (optional) reports whether the floor
/// was hit; the clamped branch has zero gradient.
Var neg_log_pick(Var probs, std::size_t index, double floor = 1e-12,
                 bool* clamped = nullptr);

// Indexing ------------------------------------------------------------------

/// Rows of `table` selected by ids: [V x d] -> [ids.size() x d]. Throws
/// LookupError for an id outside [0, V).
Var gather_rows(Var table, std::span<const int> ids);
Var slice_rows(Var a, std::size_t lo, std::size_t hi);
Var slice_cols(Var a, std::size_t lo, std::size_t hi);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);

// Convolution ---------------------------------------------------------------

/// Cross-correlation over time on channel-first input:
/// x[C_in x T], w[C_out x C_in x k] -> [C_out x T'].
Var conv1d(Var x, Var w, Padding padding);
/// Same op on time-major input: x[T x C_in] -> [T' x C_out].
Var conv1d_time_major(Var x, Var w, Padding padding);
/// Same-padded 2-D cross-correlation: x[C_in x H x W], w[C_out x C_in x kh x kw]
/// -> [C_out x H x W]. H >= kh and W >= kw are required.
Var conv2d(Var x, Var w);

// Gradient reversal ---------------------------------------------------------

/// Identity forward (bit-equal copy); backward multiplies by -lambda.
Var grl(Var a, double lambda);

}  // namespace xsng
