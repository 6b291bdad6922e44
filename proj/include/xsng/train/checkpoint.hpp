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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "xsng/train/trainer.hpp"

namespace xsng {

// Layout (little-endian):
//   "XSNG" | u16 version | u32 entry count
//   per entry: u32 name length | name bytes | u8 dtype (1 = f64) | u8 rank |
//              rank x u64 dims | u64 byte offset into the data section
//   data section: raw f64 arrays
//   u64 JSON length | JSON (counters, RNG state, config snapshot)
//
// Entry names: parameter names as-is, optimizer moments as
// "opt.g.m/<name>", "opt.g.v/<name>", "opt.d.m/<name>", "opt.d.v/<name>".

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  TrainState state;

  bool operator==(const Checkpoint&) const = default;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws FormatError for a bad magic, an unknown version, truncation or an
/// inconsistent manifest.
Checkpoint parse_checkpoint(std::string_view bytes);

/// Writes through a temporary file renamed into place.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws FileError when unreadable, FormatError when malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xsng
