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

#include "xsng/params.hpp"

#include <algorithm>

#include "xsng/error.hpp"

namespace xsng {

void ParamStore::add(std::string name, Tensor value) {
  if (!params_.emplace(name, std::move(value)).second) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
}

Tensor& ParamStore::at(std::string_view name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw LookupError("no parameter named '" + std::string(name) + "'");
  return it->second;
}

const Tensor& ParamStore::at(std::string_view name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw LookupError("no parameter named '" + std::string(name) + "'");
  return it->second;
}

void ParamStore::merge(const ParamStore& other) {
  for (const auto& [name, value] : other) add(name, value);
}

ParamStore ParamStore::subset(std::string_view prefix) const {
  ParamStore out;
  for (const auto& [name, value] : params_) {
    if (name.starts_with(prefix)) out.add(name, value);
  }
  return out;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, value] : params_) n += value.size();
  return n;
}

bool ParamStore::all_finite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](const auto& kv) { return kv.second.all_finite(); });
}

Tensor ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(element_count());
  for (const auto& [name, value] : params_) flat.insert(flat.end(), value.data().begin(), value.data().end());
  if (flat.empty()) return Tensor();
  const std::size_t n = flat.size();
  return Tensor({n}, std::move(flat));
}

void ParamStore::unflatten(const Tensor& flat) {
  if (flat.size() != element_count()) {
    throw DimensionError("unflatten: expected " + std::to_string(element_count()) +
                         " values, got " + std::to_string(flat.size()));
  }
  std::size_t at = 0;
  for (auto& [name, value] : params_) {
    std::copy_n(flat.ptr() + at, value.size(), value.ptr());
    at += value.size();
  }
}

Var ParamBinding::operator[](std::string_view name) const {
  const auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = tape_->leaf(store_->at(name), requires_grad_);
  bound_.emplace(std::string(name), v);
  return v;
}

void ParamBinding::bind(const std::string& name, Var value) {
  if (value.shape() != store_->at(name).shape()) {
    throw DimensionError("bind: '" + name + "' expects " + to_string(store_->at(name).shape()) + ", got " +
                         to_string(value.shape()));
  }
  if (!bound_.emplace(name, value).second) throw ContractError("bind: '" + name + "' is already bound");
}

GradientMap ParamBinding::gradients(const Gradients& grads) const {
  GradientMap out;
  for (const auto& [name, value] : *store_) {
    const auto it = bound_.find(name);
    out.emplace(name, it == bound_.end() ? Tensor(value.shape()) : grads[it->second]);
  }
  return out;
}

}  // namespace xsng
