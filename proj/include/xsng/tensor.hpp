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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace xsng {

class CounterRng;

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles. Value semantics: copies are deep.
///
/// Invariants: every dimension is >= 1 and the element count equals the
/// product of the dimensions.
class Tensor {
 public:
  /// A single zero, shape [1].
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor({1}, value); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  /// i.i.d. N(0, stddev^2).
  static Tensor randn(Shape shape, CounterRng& rng, double stddev = 1.0);
  static Tensor uniform(Shape shape, CounterRng& rng, double lo, double hi);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& vec() const noexcept { return data_; }
  double* ptr() noexcept { return data_.data(); }
  const double* ptr() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  /// 2-D access; no bounds check beyond the flat index.
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * shape_.back() + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_.back() + c]; }

  /// The sole element of a size-1 tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;
  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  /// Exact (bitwise for non-NaN values) equality of shape and data.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Largest |a_i - b_i|; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace xsng
