// src/folds.cc

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

#include "sapser/folds.h"

#include <map>
#include <set>

#include "sapser/error.h"

namespace sapser {

FoldPlan BuildFolds(std::span<const UtteranceRecord> records, FoldScheme) {
  std::set<std::string> speakers;
  for (const auto &r : records) speakers.insert(r.speaker_id);
  if (speakers.size() < 3)
    Fail(ErrorCode::kSingleSpeaker,
         std::to_string(speakers.size()) +
             " speaker(s); leave-one-speaker-out needs at least 3 for "
             "train/validation/test roles");
  FoldPlan plan;
  for (const auto &s : speakers) plan.folds.push_back({s});
  const size_t n = plan.folds.size();
  for (size_t r = 0; r < n; ++r) {
    FoldRun run;
    run.test_fold = r;
    run.val_fold = (r + 1) % n;
    for (size_t f = 0; f < n; ++f)
      if (f != run.test_fold && f != run.val_fold) run.train_folds.push_back(f);
    plan.runs.push_back(std::move(run));
  }
  return plan;
}

RunSplit SplitForRun(const FoldPlan &plan, size_t run,
                     std::span<const UtteranceRecord> records) {
  if (run >= plan.runs.size())
    Fail(ErrorCode::kInvalidArgument, "run index out of range");
  const FoldRun &fr = plan.runs[run];
  std::map<std::string, int> role;  // 0 train, 1 val, 2 test
  for (size_t f : fr.train_folds)
    for (const auto &s : plan.folds[f]) role[s] = 0;
  for (const auto &s : plan.folds[fr.val_fold]) {
    if (role.count(s)) Fail(ErrorCode::kInvalidArgument, "speaker " + s + " in two roles");
    role[s] = 1;
  }
  for (const auto &s : plan.folds[fr.test_fold]) {
    if (role.count(s)) Fail(ErrorCode::kInvalidArgument, "speaker " + s + " in two roles");
    role[s] = 2;
  }
  RunSplit split;
  for (size_t i = 0; i < records.size(); ++i) {
    auto it = role.find(records[i].speaker_id);
    if (it == role.end())
      Fail(ErrorCode::kInvalidArgument,
           "speaker " + records[i].speaker_id + " missing from fold plan");
    (it->second == 0 ? split.train : it->second == 1 ? split.val : split.test)
        .push_back(i);
  }
  return split;
}

}  // namespace sapser
