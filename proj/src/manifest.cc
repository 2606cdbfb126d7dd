// src/manifest.cc

// Copyright 2026  The sapser Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "sapser/manifest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sapser/error.h"

namespace sapser {
namespace {

constexpr const char *kHeader =
    "id,audio_path,feature_path,speaker_id,session_id,label,valence,arousal,"
    "valence_min,valence_max,arousal_min,arousal_max,duration_s";

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double Scale(double v, double lo, double hi) { return (v - lo) / (hi - lo); }

}  // namespace

std::vector<std::string> EmotionNames() {
  return {kEmotionNames.begin(), kEmotionNames.end()};
}

int ParseEmotion(std::string_view label) {
  if (label == "excited") label = "happy";
  for (size_t c = 0; c < kEmotionNames.size(); ++c)
    if (label == kEmotionNames[c]) return static_cast<int>(c);
  Fail(ErrorCode::kUnknownLabel, "label '" + std::string(label) + "'");
}

double UtteranceRecord::ScaledValence() const {
  return Scale(valence, valence_min, valence_max);
}
double UtteranceRecord::ScaledArousal() const {
  return Scale(arousal, arousal_min, arousal_max);
}

std::vector<UtteranceRecord> LoadManifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kParseError, "empty manifest");
  std::map<std::string, size_t> col;
  {
    const auto names = SplitCsv(line);
    for (size_t i = 0; i < names.size(); ++i) col[Trim(names[i])] = i;
  }
  for (const char *required :
       {"id", "audio_path", "speaker_id", "session_id", "label", "valence",
        "arousal", "valence_min", "valence_max", "arousal_min", "arousal_max",
        "duration_s"})
    if (!col.count(required))
      Fail(ErrorCode::kMissingColumn, path.string() + ": " + required);

  std::vector<UtteranceRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    auto field = [&](const char *name) -> std::string {
      auto it = col.find(name);
      if (it == col.end()) return "";
      if (it->second >= fields.size())
        Fail(ErrorCode::kParseError, where + ": missing field " + name);
      return Trim(fields[it->second]);
    };
    auto number = [&](const char *name) {
      const std::string s = field(name);
      try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::logic_error &) {
        Fail(ErrorCode::kParseError, where + ": bad number in " + name + ": '" +
                                         s + "'");
      }
    };
    UtteranceRecord r;
    r.id = field("id");
    if (r.id.empty()) Fail(ErrorCode::kParseError, where + ": empty id");
    const std::string audio = field("audio_path");
    const std::string feats = field("feature_path");
    if (!audio.empty()) r.audio_path = base / audio;
    if (!feats.empty()) r.feature_path = base / feats;
    if (audio.empty() && feats.empty())
      Fail(ErrorCode::kParseError, where + ": needs audio_path or feature_path");
    r.speaker_id = field("speaker_id");
    if (r.speaker_id.empty())
      Fail(ErrorCode::kParseError, where + ": empty speaker_id");
    r.session_id = field("session_id");
    r.label = ParseEmotion(field("label"));
    r.valence = number("valence");
    r.arousal = number("arousal");
    r.valence_min = number("valence_min");
    r.valence_max = number("valence_max");
    r.arousal_min = number("arousal_min");
    r.arousal_max = number("arousal_max");
    r.duration_s = number("duration_s");
    if (!(r.valence_min < r.valence_max) || !(r.arousal_min < r.arousal_max))
      Fail(ErrorCode::kParseError, where + ": empty valence/arousal range");
    if (r.valence < r.valence_min || r.valence > r.valence_max ||
        r.arousal < r.arousal_min || r.arousal > r.arousal_max)
      Fail(ErrorCode::kParseError, where + ": valence/arousal outside range");
    records.push_back(std::move(r));
  }
  return records;
}

void WriteManifest(std::span<const UtteranceRecord> records,
                   const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << kHeader << "\n";
  for (const auto &r : records)
    out << r.id << "," << r.audio_path.generic_string() << ","
        << r.feature_path.generic_string() << "," << r.speaker_id << ","
        << r.session_id << "," << kEmotionNames[r.label] << "," << Num(r.valence)
        << "," << Num(r.arousal) << "," << Num(r.valence_min) << ","
        << Num(r.valence_max) << "," << Num(r.arousal_min) << ","
        << Num(r.arousal_max) << "," << Num(r.duration_s) << "\n";
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace sapser
