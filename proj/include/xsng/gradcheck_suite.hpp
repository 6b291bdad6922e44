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

#include <optional>
#include <string>
#include <vector>

#include "xsng/grad_check.hpp"

namespace xsng {

struct GradCheckCase {
  std::string module;  // ops, cln, block, eliminator, discriminators, generator
  std::string name;
  GradCheckResult result;
  double seconds = 0.0;
};

/// Module names accepted by run_gradcheck_suite.
std::vector<std::string> gradcheck_modules();

/// Finite-difference checks of every differentiable building block on
/// seeded random inputs. `module` restricts the run to one group; an
/// unknown name throws ConfigError.
std::vector<GradCheckCase> run_gradcheck_suite(const std::optional<std::string>& module = std::nullopt,
                                               double h = 1e-5);

}  // namespace xsng
