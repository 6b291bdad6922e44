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

#include "xsng/tape.hpp"

#include <limits>

#include "xsng/error.hpp"

namespace xsng {

Tensor Gradients::operator[](Var v) const {
  if (v.id() < grads_.size() && present_[v.id()]) return grads_[v.id()];
  return Tensor(v.shape());
}

bool Gradients::reached(Var v) const {
  return v.id() < present_.size() && present_[v.id()];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ContractError("tape node limit reached");
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{std::move(value), {}, {}, requires_grad});
  return Var(this, id);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ContractError("op mixes variables from different tapes");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return Var(this, id);
}

Gradients Tape::backward(Var loss) const {
  if (&loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  Gradients out;
  out.tape_ = this;
  out.grads_.resize(loss.id() + 1);
  out.present_.assign(loss.id() + 1, false);
  out.grads_[loss.id()] = Tensor(loss.shape(), 1.0);
  out.present_[loss.id()] = true;

  std::vector<Tensor*> slots;
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    if (!out.present_[id]) continue;
    const Node& node = nodes_[id];
    if (!node.backward) continue;
    slots.assign(node.inputs.size(), nullptr);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      const std::uint32_t in = node.inputs[i];
      if (!nodes_[in].requires_grad) continue;
      if (!out.present_[in]) {
        out.grads_[in] = Tensor(nodes_[in].value.shape());
        out.present_[in] = true;
      }
      slots[i] = &out.grads_[in];
    }
    node.backward(BackwardContext{*this, node.inputs, node.value, out.grads_[id], slots});
  }
  return out;
}

}  // namespace xsng
