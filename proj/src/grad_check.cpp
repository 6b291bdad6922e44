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

#include "xsng/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsng/error.hpp"

namespace xsng {
namespace {

double evaluate(const ScalarGraph& f, const Tensor& x) {
  Tape tape;
  Var loss = f(tape, tape.leaf(x, false));
  if (loss.value().size() != 1) {
    throw ContractError("grad_check: function must return a scalar, got " +
                        to_string(loss.shape()));
  }
  const double v = loss.value()[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: function returned a non-finite value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarGraph& f, const Tensor& x, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw ContractError("grad_check: step h must lie in [1e-7, 1e-3], got " + std::to_string(h));
  }
  Tensor analytic;
  {
    Tape tape;
    Var leaf = tape.leaf(x, true);
    Var loss = f(tape, leaf);
    if (!std::isfinite(loss.value().item())) {
      throw NumericError("grad_check: function returned a non-finite value");
    }
    analytic = tape.backward(loss)[leaf];
  }

  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = evaluate(f, probe);
    probe[i] = saved - h;
    const double down = evaluate(f, probe);
    probe[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    if (i == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = i;
      result.analytic_at_worst = a;
      result.numeric_at_worst = numeric;
    }
  }
  result.coordinates_checked = x.size();
  return result;
}

}  // namespace xsng
