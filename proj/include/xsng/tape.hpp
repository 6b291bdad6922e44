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

// Define-by-run reverse-mode differentiation. A Tape is built fresh for every
// forward pass; each recorded op appends a node whose inputs all have smaller
// ids, and backward() walks ids in strictly descending order exactly once.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "xsng/tensor.hpp"

namespace xsng {

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::uint32_t id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) noexcept : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// What a backward rule sees. Rules must accumulate (+=) into input grads;
/// a null input grad means that input does not need a gradient.
struct BackwardContext {
  const Tape& tape;
  std::span<const std::uint32_t> inputs;
  const Tensor& output;
  const Tensor& grad;
  std::span<Tensor* const> input_grads;

  const Tensor& input(std::size_t i) const;
  Tensor* grad_of(std::size_t i) const { return input_grads[i]; }
};

using BackwardFn = std::function<void(const BackwardContext&)>;

/// Result of Tape::backward: gradient per node. Nodes the loss does not reach
/// report zeros of their own shape.
class Gradients {
 public:
  Tensor operator[](Var v) const;
  bool reached(Var v) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> grads_;
  std::vector<bool> present_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input node; gradients flow to it iff requires_grad.
  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends an op node. The node needs a gradient if any input does; when
  /// none does the backward rule is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse sweep from a single-element loss.
  Gradients backward(Var loss) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  // deque: references to node values stay valid while the tape grows.
  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }
inline const Tensor& BackwardContext::input(std::size_t i) const {
  return tape.value(inputs[i]);
}

}  // namespace xsng
