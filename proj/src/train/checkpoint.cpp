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

#include "xsng/train/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <sstream>
#include <vector>

#include "xsng/error.hpp"

namespace xsng {
namespace {

constexpr char kMagic[4] = {'X', 'S', 'N', 'G'};
constexpr std::uint8_t kDtypeF64 = 1;

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

struct Entry {
  std::string name;
  const Tensor* tensor;
};

std::vector<Entry> entries_of(const TrainState& s) {
  std::vector<Entry> out;
  for (const auto& [name, t] : s.generator) out.push_back({name, &t});
  for (const auto& [name, t] : s.discriminator) out.push_back({name, &t});
  for (const auto& [name, t] : s.opt_g.m) out.push_back({"opt.g.m/" + name, &t});
  for (const auto& [name, t] : s.opt_g.v) out.push_back({"opt.g.v/" + name, &t});
  for (const auto& [name, t] : s.opt_d.m) out.push_back({"opt.d.m/" + name, &t});
  for (const auto& [name, t] : s.opt_d.v) out.push_back({"opt.d.v/" + name, &t});
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  const std::vector<Entry> entries = entries_of(ck.state);
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint16_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (const Entry& e : entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put<std::uint8_t>(out, kDtypeF64);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.tensor->rank()));
    for (const std::size_t d : e.tensor->shape()) put<std::uint64_t>(out, d);
    put<std::uint64_t>(out, offset);
    offset += e.tensor->size() * sizeof(double);
  }
  for (const Entry& e : entries) {
    for (const double v : e.tensor->data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }

  nlohmann::json meta;
  meta["step"] = ck.state.step;
  meta["epoch"] = ck.state.epoch;
  meta["batch_in_epoch"] = ck.state.batch_in_epoch;
  meta["warmup_end_epoch"] = ck.state.warmup_end_epoch;
  meta["opt_g_step"] = ck.state.opt_g.step;
  meta["opt_d_step"] = ck.state.opt_d.step;
  // Every random draw is keyed by (seed, stream, index); the indices are
  // the step and epoch counters above.
  meta["rng"] = {{"seed", ck.config.seed}, {"shuffle_epoch", ck.state.epoch}, {"crop_step", ck.state.step}};
  meta["config"] = nlohmann::json::parse(config_to_json(ck.config));
  const std::string text = meta.dump();
  put<std::uint64_t>(out, text.size());
  out += text;
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  struct Header {
    std::string name;
    Shape shape;
    std::uint64_t offset;
  };
  const auto count = r.get<std::uint32_t>();
  std::vector<Header> headers;
  std::uint64_t expected_offset = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    Header h;
    h.name = std::string(r.take(r.get<std::uint32_t>()));
    if (r.get<std::uint8_t>() != kDtypeF64) throw FormatError("entry '" + h.name + "' has an unknown dtype");
    const auto rank = r.get<std::uint8_t>();
    if (rank == 0) throw FormatError("entry '" + h.name + "' has rank 0");
    std::uint64_t elements = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      const auto d = r.get<std::uint64_t>();
      if (d == 0 || d > bytes.size()) throw FormatError("entry '" + h.name + "' has a bad dimension");
      h.shape.push_back(static_cast<std::size_t>(d));
      elements *= d;
      if (elements > bytes.size()) throw FormatError("entry '" + h.name + "' is larger than the file");
    }
    h.offset = r.get<std::uint64_t>();
    if (h.offset != expected_offset) throw FormatError("entry '" + h.name + "' has an inconsistent offset");
    expected_offset += elements * sizeof(double);
    headers.push_back(std::move(h));
  }

  Checkpoint ck;
  TrainState& s = ck.state;
  for (const Header& h : headers) {
    std::vector<double> data(shape_size(h.shape));
    for (double& v : data) v = std::bit_cast<double>(r.get<std::uint64_t>());
    Tensor t(h.shape, std::move(data));
    const auto slash = h.name.find('/');
    const std::string prefix = slash == std::string::npos ? "" : h.name.substr(0, slash);
    const std::string rest = slash == std::string::npos ? h.name : h.name.substr(slash + 1);
    try {
      if (prefix == "opt.g.m") s.opt_g.m.add(rest, std::move(t));
      else if (prefix == "opt.g.v") s.opt_g.v.add(rest, std::move(t));
      else if (prefix == "opt.d.m") s.opt_d.m.add(rest, std::move(t));
      else if (prefix == "opt.d.v") s.opt_d.v.add(rest, std::move(t));
      else if (!prefix.empty()) throw FormatError("entry '" + h.name + "' has an unknown prefix");
      else if (h.name.starts_with("disc.")) s.discriminator.add(h.name, std::move(t));
      else s.generator.add(h.name, std::move(t));
    } catch (const ContractError&) {
      throw FormatError("entry '" + h.name + "' appears twice");
    }
  }

  const auto json_len = r.get<std::uint64_t>();
  if (json_len != r.remaining()) throw FormatError("checkpoint metadata length does not match the file");
  try {
    const nlohmann::json meta = nlohmann::json::parse(r.take(static_cast<std::size_t>(json_len)));
    s.step = meta.at("step").get<std::int64_t>();
    s.epoch = meta.at("epoch").get<std::int64_t>();
    s.batch_in_epoch = meta.at("batch_in_epoch").get<std::int64_t>();
    s.warmup_end_epoch = meta.at("warmup_end_epoch").get<std::int64_t>();
    s.opt_g.step = meta.at("opt_g_step").get<std::int64_t>();
    s.opt_d.step = meta.at("opt_d_step").get<std::int64_t>();
    ck.config = config_from_json(meta.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata is malformed: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config is invalid: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FileError(tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace xsng
