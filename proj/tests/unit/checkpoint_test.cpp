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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "xsng/error.hpp"
#include "xsng/train/checkpoint.hpp"

namespace xsng {
namespace {

const UnifiedLexicon& shipped() {
  static const UnifiedLexicon lexicon = load_lexicon_dir(default_lexicon_dir());
  return lexicon;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CheckpointFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("xsng_ckpt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

Checkpoint trained(int steps) {
  TrainConfig c;
  c.epochs = 3;
  Trainer t(c, shipped());
  for (int s = 0; s < steps; ++s) t.step();
  return {t.config(), t.state()};
}

TEST_F(CheckpointFile, SaveLoadSaveIsByteIdentical) {
  const Checkpoint ck = trained(2);
  save_checkpoint(ck, dir_ / "a.xsng");
  const Checkpoint loaded = load_checkpoint(dir_ / "a.xsng");
  EXPECT_EQ(loaded, ck);
  save_checkpoint(loaded, dir_ / "b.xsng");
  EXPECT_EQ(read_file(dir_ / "a.xsng"), read_file(dir_ / "b.xsng"));
}

TEST(Checkpoint, HeaderLayout) {
  const std::string bytes = serialize_checkpoint(trained(0));
  ASSERT_GT(bytes.size(), 10u);
  EXPECT_EQ(bytes.substr(0, 4), "XSNG");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kCheckpointVersion);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0);
  EXPECT_NE(bytes.find("\"config\""), std::string::npos);
}

TEST_F(CheckpointFile, CorruptMagicIsFormatError) {
  std::string bytes = serialize_checkpoint(trained(0));
  bytes[0] = 'Y';
  EXPECT_THROW(parse_checkpoint(bytes), FormatError);
  std::ofstream(dir_ / "bad.xsng", std::ios::binary) << bytes;
  EXPECT_THROW(load_checkpoint(dir_ / "bad.xsng"), FormatError);
}

TEST(Checkpoint, UnknownVersionIsFormatError) {
  std::string bytes = serialize_checkpoint(trained(0));
  bytes[4] = 7;
  EXPECT_THROW(parse_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, EveryTruncationIsFormatError) {
  const std::string bytes = serialize_checkpoint(trained(0));
  for (std::size_t cut = 0; cut < bytes.size(); cut += 997) {
    EXPECT_THROW(parse_checkpoint(std::string_view(bytes).substr(0, cut)), FormatError) << cut;
  }
  EXPECT_THROW(parse_checkpoint(std::string_view(bytes).substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(parse_checkpoint(bytes + "x"), FormatError);
}

TEST(Checkpoint, MissingFileIsFileError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/ck.xsng"), FileError);
}

TEST_F(CheckpointFile, SaveLeavesOnlyTheTargetFile) {
  const std::string good = serialize_checkpoint(trained(0));
  save_checkpoint(trained(0), dir_ / "c.xsng");
  std::vector<std::filesystem::path> names;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) names.push_back(e.path().filename());
  EXPECT_EQ(names, (std::vector<std::filesystem::path>{"c.xsng"}));
  EXPECT_EQ(read_file(dir_ / "c.xsng"), good);
}

// Split at a point inside the second epoch so the shuffle, crop and
// schedule counters all have to come back from the file.
TEST(Checkpoint, ResumedRunMatchesUninterruptedRun) {
  TrainConfig c;
  c.epochs = 3;
  Trainer straight(c, shipped());
  std::vector<StepMetrics> expected;
  for (int s = 0; s < 11; ++s) expected.push_back(straight.step());

  Trainer first(c, shipped());
  std::vector<StepMetrics> got;
  for (int s = 0; s < 9; ++s) got.push_back(first.step());
  const Checkpoint ck = parse_checkpoint(serialize_checkpoint({first.config(), first.state()}));
  Trainer second(ck.config, shipped(), ck.state);
  for (int s = 0; s < 2; ++s) got.push_back(second.step());

  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(metrics_to_json(got[i]), metrics_to_json(expected[i]));
    EXPECT_EQ(got[i], expected[i]);
  }
  EXPECT_EQ(second.state(), straight.state());
}

}  // namespace
}  // namespace xsng
