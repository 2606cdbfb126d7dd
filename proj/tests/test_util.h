// tests/test_util.h

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

#ifndef SAPSER_TESTS_TEST_UTIL_H_
#define SAPSER_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "sapser/error.h"

namespace sapser::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sapser_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

/// The ErrorCode thrown by f, or nullopt when it returns normally.
template <typename F>
std::optional<ErrorCode> CodeOf(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return std::nullopt;
}

inline void PutLe(std::string *s, uint32_t v, int bytes) {
  for (int k = 0; k < bytes; ++k) s->push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

/// Hand-assembled RIFF/WAVE file with a PCM fmt chunk.
inline std::string WavBytes(const std::vector<int16_t> &pcm, uint32_t rate = 16000,
                            uint16_t channels = 1, uint16_t bits = 16,
                            uint16_t format = 1) {
  std::string data;
  for (int16_t v : pcm) PutLe(&data, static_cast<uint16_t>(v), 2);
  std::string s = "RIFF";
  PutLe(&s, static_cast<uint32_t>(36 + data.size()), 4);
  s += "WAVEfmt ";
  PutLe(&s, 16, 4);
  PutLe(&s, format, 2);
  PutLe(&s, channels, 2);
  PutLe(&s, rate, 4);
  PutLe(&s, rate * channels * bits / 8, 4);
  PutLe(&s, static_cast<uint16_t>(channels * bits / 8), 2);
  PutLe(&s, bits, 2);
  s += "data";
  PutLe(&s, static_cast<uint32_t>(data.size()), 4);
  return s + data;
}

inline void WriteBytes(const std::filesystem::path &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

inline std::string ReadBytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sapser::testing

#endif  // SAPSER_TESTS_TEST_UTIL_H_
