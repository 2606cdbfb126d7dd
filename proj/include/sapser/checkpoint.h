// include/sapser/checkpoint.h

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

#ifndef SAPSER_CHECKPOINT_H_
#define SAPSER_CHECKPOINT_H_

#include <filesystem>

#include "sapser/training.h"

namespace sapser {

// Checkpoint layout, little-endian:
//   "SAPC" | u32 version=1 | u32 config_bytes | config text (key=value
//   lines) | u32 block_count | per block: u32 name_bytes | name |
//   u32 rank | rank x u32 dims | prod(dims) float32 values.
// Blocks are written in SerModel::AllBlocks order.
inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const SerModel<float> &model,
                    const std::filesystem::path &path);

/// Throws kShapeMismatch when expected is given and its pooling layout or
/// dimensions differ from the stored model.
SerModel<float> LoadCheckpoint(const std::filesystem::path &path,
                               const ModelConfig *expected = nullptr);

}  // namespace sapser

#endif  // SAPSER_CHECKPOINT_H_
