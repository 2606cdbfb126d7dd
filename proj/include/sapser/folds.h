// include/sapser/folds.h

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

#ifndef SAPSER_FOLDS_H_
#define SAPSER_FOLDS_H_

#include <span>
#include <string>
#include <vector>

#include "sapser/manifest.h"

namespace sapser {

enum class FoldScheme { kBySpeaker };

/// Role assignment for one cross-validation run, as fold indices.
struct FoldRun {
  size_t test_fold = 0;
  size_t val_fold = 0;
  std::vector<size_t> train_folds;
};

/// Leave-one-speaker-out plan: fold i holds speaker speakers[i] (sorted by
/// id). Run r tests on fold r, validates on fold (r + 1) mod n and trains
/// on the rest.
struct FoldPlan {
  std::vector<std::vector<std::string>> folds;
  std::vector<FoldRun> runs;
};

FoldPlan BuildFolds(std::span<const UtteranceRecord> records,
                    FoldScheme scheme = FoldScheme::kBySpeaker);

/// Record indices per role for one run.
struct RunSplit {
  std::vector<size_t> train, val, test;
};

/// Also asserts that the three speaker sets are pairwise disjoint.
RunSplit SplitForRun(const FoldPlan &plan, size_t run,
                     std::span<const UtteranceRecord> records);

}  // namespace sapser

#endif  // SAPSER_FOLDS_H_
