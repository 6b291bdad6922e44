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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace xsng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw k is mix64(key + (k + 1) * golden), i.e.
/// SplitMix64 with an explicit counter. The whole state is (key, counter),
/// so any stream can be re-entered from a checkpoint and the sequence is
/// fixed across platforms and implementation languages.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  /// Independent stream for (seed, purpose, index).
  static CounterRng derive(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index = 0) noexcept {
    return CounterRng(mix64(mix64(seed ^ mix64(stream + kGolden)) + index));
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi], Lemire multiply-shift (no modulo bias for
  /// practical ranges).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto prod =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(range);
    return lo + static_cast<std::int64_t>(prod >> 64);
  }

  /// Standard normal via Box-Muller (one draw per pair of uniforms).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Named stream ids, so the same seed never feeds two purposes.
namespace rng_stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kCorpus = 2;
inline constexpr std::uint64_t kRender = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kCrop = 5;
inline constexpr std::uint64_t kProbe = 6;
inline constexpr std::uint64_t kTest = 99;
}  // namespace rng_stream

}  // namespace xsng
