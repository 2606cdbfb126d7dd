// src/checkpoint.cc

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

#include "sapser/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sapser {
namespace {

void PutU32(std::string *out, uint32_t v) {
  for (int k = 0; k < 4; ++k)
    out->push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string &bytes, const std::filesystem::path &path)
      : bytes_(bytes), path_(path) {}

  uint32_t U32() {
    Need(4);
    const auto *p = reinterpret_cast<const unsigned char *>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
  }
  std::string Bytes(size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n)
      Fail(ErrorCode::kTruncatedPayload, path_.string());
  }
  const std::string &bytes_;
  std::filesystem::path path_;
  size_t pos_ = 0;
};

bool SameLayout(const ModelConfig &a, const ModelConfig &b) {
  return a.pooling == b.pooling && a.feature_dim == b.feature_dim &&
         a.projection_dim == b.projection_dim && a.num_classes == b.num_classes &&
         a.bypass_attention == b.bypass_attention;
}

}  // namespace

void SaveCheckpoint(const SerModel<float> &model,
                    const std::filesystem::path &path) {
  SerModel<float> copy = model;
  std::string out = "SAPC";
  PutU32(&out, kCheckpointVersion);
  const std::string config = model.config().Serialize();
  PutU32(&out, static_cast<uint32_t>(config.size()));
  out += config;
  const auto blocks = copy.AllBlocks();
  PutU32(&out, static_cast<uint32_t>(blocks.size()));
  for (const auto &b : blocks) {
    PutU32(&out, static_cast<uint32_t>(b.name.size()));
    out += b.name;
    PutU32(&out, static_cast<uint32_t>(b.shape.size()));
    for (size_t dim : b.shape) PutU32(&out, static_cast<uint32_t>(dim));
    for (float v : b.values) PutU32(&out, std::bit_cast<uint32_t>(v));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

SerModel<float> LoadCheckpoint(const std::filesystem::path &path,
                               const ModelConfig *expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 4) Fail(ErrorCode::kTruncatedPayload, path.string());
  if (std::memcmp(bytes.data(), "SAPC", 4) != 0)
    Fail(ErrorCode::kBadMagic, path.string());
  Reader r(bytes, path);
  r.Bytes(4);
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    Fail(ErrorCode::kVersionUnsupported,
         path.string() + ": version " + std::to_string(version));
  const ModelConfig config = ModelConfig::Parse(r.Bytes(r.U32()));
  if (expected != nullptr && !SameLayout(config, *expected))
    Fail(ErrorCode::kShapeMismatch,
         path.string() + ": checkpoint holds a " +
             std::string(PoolingModeName(config.pooling)) + " model (d=" +
             std::to_string(config.feature_dim) + "), requested " +
             std::string(PoolingModeName(expected->pooling)) + " (d=" +
             std::to_string(expected->feature_dim) + ")");
  SerModel<float> model(config);
  auto blocks = model.AllBlocks();
  const uint32_t count = r.U32();
  if (count != blocks.size())
    Fail(ErrorCode::kShapeMismatch, path.string() + ": block count");
  for (auto &b : blocks) {
    const std::string name = r.Bytes(r.U32());
    if (name != b.name)
      Fail(ErrorCode::kShapeMismatch,
           path.string() + ": expected block " + b.name + ", found " + name);
    const uint32_t rank = r.U32();
    std::vector<size_t> shape(rank);
    for (auto &dim : shape) dim = r.U32();
    if (shape != b.shape)
      Fail(ErrorCode::kShapeMismatch, path.string() + ": shape of " + name);
    for (float &v : b.values) v = std::bit_cast<float>(r.U32());
  }
  return model;
}

}  // namespace sapser
