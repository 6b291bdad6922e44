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

#include "xsng/frontend/score.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "xsng/error.hpp"

namespace xsng {
namespace {

using json = nlohmann::json;

std::string where(std::size_t line, std::string_view field) {
  return "line " + std::to_string(line) + ", field '" + std::string(field) + "'";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int integer_field(const json& obj, std::string_view key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where(line, key) + ": missing");
  if (!it->is_number_integer()) throw ParseError(where(line, key) + ": expected an integer");
  const auto v = it->get<std::int64_t>();
  if (v < -1'000'000'000 || v > 1'000'000'000) {
    throw ValidationError(where(line, key) + ": value " + std::to_string(v) + " out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string_view language_code(Language lang) {
  switch (lang) {
    case Language::ZH: return "ZH";
    case Language::JA: return "JA";
    case Language::EN: return "EN";
  }
  return "??";
}

Language parse_language(std::string_view code) {
  std::string up(code);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "ZH") return Language::ZH;
  if (up == "JA") return Language::JA;
  if (up == "EN") return Language::EN;
  throw ValidationError("unknown language '" + std::string(code) + "' (expected ZH, JA or EN)");
}

Language language_from_id(int id) {
  if (id < 0 || id >= kLanguageCount) {
    throw ValidationError("language id " + std::to_string(id) + " outside [0, 3)");
  }
  return static_cast<Language>(id);
}

int Score::total_frames() const {
  int total = 0;
  for (const NoteEvent& e : events) total += e.duration_frames;
  return total;
}

Score parse_score(std::string_view document) {
  Score score;
  std::istringstream lines{std::string(document)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");

    if (obj.size() == 1 && obj.contains("frame_rate_hz")) {
      const json& fr = obj["frame_rate_hz"];
      if (!fr.is_number() || !(fr.get<double>() > 0.0)) {
        throw ValidationError(where(line_no, "frame_rate_hz") + ": must be a positive number");
      }
      score.frame_rate_hz = fr.get<double>();
      continue;
    }

    for (const auto& [key, _] : obj.items()) {
      if (key != "syllable" && key != "lang" && key != "pitch" && key != "dur") {
        throw ParseError(where(line_no, key) + ": unexpected field");
      }
    }

    NoteEvent ev;
    const auto syl = obj.find("syllable");
    if (syl == obj.end()) throw ParseError(where(line_no, "syllable") + ": missing");
    if (!syl->is_string()) throw ParseError(where(line_no, "syllable") + ": expected a string");
    ev.syllable = syl->get<std::string>();
    ev.midi_pitch = integer_field(obj, "pitch", line_no);
    ev.duration_frames = integer_field(obj, "dur", line_no);

    if (ev.midi_pitch < 0 || ev.midi_pitch > 127) {
      throw ValidationError(where(line_no, "pitch") + ": " + std::to_string(ev.midi_pitch) +
                            " outside MIDI range 0-127");
    }
    if (ev.duration_frames < 1) {
      throw ValidationError(where(line_no, "dur") + ": duration must be >= 1 frame, got " +
                            std::to_string(ev.duration_frames));
    }
    if (ev.is_rest() && !ev.syllable.empty()) {
      throw ValidationError(where(line_no, "syllable") + ": rest (pitch 0) must have an empty syllable");
    }
    if (!ev.is_rest() && ev.syllable.empty()) {
      throw ValidationError(where(line_no, "syllable") + ": sung note needs a syllable");
    }

    const auto lang = obj.find("lang");
    if (lang != obj.end()) {
      if (!lang->is_string()) throw ParseError(where(line_no, "lang") + ": expected a string");
      try {
        ev.language = parse_language(lang->get<std::string>());
      } catch (const ValidationError& e) {
        throw ValidationError(where(line_no, "lang") + ": " + e.what());
      }
    } else if (!ev.is_rest()) {
      throw ParseError(where(line_no, "lang") + ": missing");
    } else if (!score.events.empty()) {
      ev.language = score.events.back().language;
    }
    score.events.push_back(std::move(ev));
  }

  if (std::none_of(score.events.begin(), score.events.end(),
                   [](const NoteEvent& e) { return !e.is_rest(); })) {
    throw ValidationError("score has no sung note");
  }
  return score;
}

Score load_score(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score(buf.str());
}

std::string format_score(const Score& score) {
  std::string out;
  if (score.frame_rate_hz != 100.0) {
    out += json{{"frame_rate_hz", score.frame_rate_hz}}.dump() + "\n";
  }
  for (const NoteEvent& e : score.events) {
    json obj;
    obj["syllable"] = e.syllable;
    obj["lang"] = std::string(language_code(e.language));
    obj["pitch"] = e.midi_pitch;
    obj["dur"] = e.duration_frames;
    out += obj.dump() + "\n";
  }
  return out;
}

}  // namespace xsng
