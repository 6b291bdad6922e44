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

#include <map>
#include <string>
#include <string_view>

#include "xsng/tape.hpp"

namespace xsng {

/// Named parameter tensors, iterated in name order (which is also the
/// checkpoint order).
class ParamStore {
 public:
  using Map = std::map<std::string, Tensor, std::less<>>;

  /// Throws ContractError on a duplicate name.
  void add(std::string name, Tensor value);
  /// Throws LookupError for a missing name.
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }

  /// Adds every entry of `other`; names must not collide.
  void merge(const ParamStore& other);
  /// Entries whose name starts with `prefix`.
  ParamStore subset(std::string_view prefix) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t element_count() const;
  bool all_finite() const;

  /// All values concatenated in name order, and the inverse.
  Tensor flatten() const;
  void unflatten(const Tensor& flat);

  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }
  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }

  bool operator==(const ParamStore&) const = default;

 private:
  Map params_;
};

/// Parameters placed on one tape. Entries are registered on first use, so
/// parameters a graph never touches stay off the tape and get no gradient.
class ParamBinding {
 public:
  ParamBinding(Tape& tape, const ParamStore& store, bool requires_grad = true)
      : tape_(&tape), store_(&store), requires_grad_(requires_grad) {}

  Var operator[](std::string_view name) const;
  /// Uses `value` for `name` instead of a fresh leaf (for example a slice
  /// of one flat vector under test). Throws ContractError when `name` is
  /// already bound, DimensionError when the shape differs from the store.
  void bind(const std::string& name, Var value);
  Tape& tape() const noexcept { return *tape_; }
  const ParamStore& store() const noexcept { return *store_; }

  /// Gradient for every parameter in the store (zeros when unused).
  std::map<std::string, Tensor, std::less<>> gradients(const Gradients& grads) const;

 private:
  Tape* tape_;
  const ParamStore* store_;
  bool requires_grad_;
  mutable std::map<std::string, Var, std::less<>> bound_;
};

using GradientMap = std::map<std::string, Tensor, std::less<>>;

}  // namespace xsng
