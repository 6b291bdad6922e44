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

#include <cstddef>
#include <functional>

#include "xsng/tape.hpp"

namespace xsng {

/// Builds a scalar loss on `tape` from the leaf `x`. Must be deterministic.
using ScalarGraph = std::function<Var(Tape& tape, Var x)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Compares the tape gradient of f at x with central differences
/// (f(x + h e_i) - f(x - h e_i)) / 2h on every coordinate. Relative error per
/// coordinate is |a - n| / max(|a|, |n|, 1e-8).
///
/// Throws ContractError if h is outside [1e-7, 1e-3] and NumericError if f
/// returns a non-finite value.
GradCheckResult grad_check(const ScalarGraph& f, const Tensor& x, double h = 1e-5);

}  // namespace xsng
