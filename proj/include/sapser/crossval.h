// include/sapser/crossval.h

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

#ifndef SAPSER_CROSSVAL_H_
#define SAPSER_CROSSVAL_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sapser/evaluation.h"
#include "sapser/features.h"
#include "sapser/folds.h"
#include "sapser/model.h"
#include "sapser/training.h"
#include "sapser/vad.h"

namespace sapser {

/// Where speech masks come from: the built-in detector, mask files named
/// <id>.txt in a directory, or the ground-truth files the synthetic
/// generator writes (default directory <manifest dir>/truth).
enum class VadSource { kBuiltin, kExternal, kGroundTruth };

std::string_view VadSourceName(VadSource source);
/// Accepts builtin, external, truth, ground_truth.
VadSource ParseVadSource(std::string_view name);

struct CrossValOptions {
  ModelConfig model;
  VadSource vad_source = VadSource::kBuiltin;
  VadConfig vad;
  FrameSpec frames;
  MelConfig mel;
  double max_seconds = 19.0;
  std::filesystem::path mask_dir;  // external / ground-truth masks
  bool save_checkpoints = true;
};

/// Features and aligned speech masks for every manifest row.
struct PreparedCorpus {
  std::vector<UtteranceRecord> records;
  std::vector<FeatureMatrix> features;
  std::vector<AlignedMask> keep;
  std::vector<double> speech_ratio;  // kept frames / frames

  std::vector<Example> Examples(std::span<const size_t> indices) const;
};

/// Loads or extracts features and computes masks, in parallel over rows.
/// manifest_dir resolves the default ground-truth directory.
PreparedCorpus PrepareCorpus(std::span<const UtteranceRecord> records,
                             const CrossValOptions &options,
                             const std::filesystem::path &manifest_dir);

/// Test-set metrics of one model.
struct EvaluationResult {
  ConfusionMatrix confusion;
  std::optional<double> ua;  // empty when a class is absent from the set
  double wa = 0;
  double mae_valence = 0;    // on [0, 1]-scaled targets
  double mae_arousal = 0;
  size_t fallbacks = 0;      // utterances where SAP saw no speech frame
};

EvaluationResult EvaluateModel(const SerModel<float> &model,
                               std::span<const Example> examples);

/// Writes report.json, confusion.csv and confusion.svg for one result.
void WriteEvaluationReport(const EvaluationResult &result,
                           const std::filesystem::path &out_dir);

struct FoldReport {
  std::string test_speaker;
  std::string val_speaker;
  size_t n_train = 0, n_val = 0, n_test = 0;
  EvaluationResult metrics;
  size_t best_epoch = 0;
  size_t epochs_run = 0;
  bool early_stopped = false;
};

struct AggregateReport {
  ConfusionMatrix pooled;
  std::vector<NamedSummary> summaries;  // ua, wa in percent; MAEs scaled
  std::vector<FoldReport> folds;
};

/// Pure reduction over fold reports, in the given order.
AggregateReport Aggregate(std::span<const FoldReport> folds);

/// JSON text of an aggregate report. Carries no paths or timestamps, so
/// equal inputs give byte-identical text.
std::string AggregateJson(const AggregateReport &report,
                          const CrossValOptions &options);

/// Leave-one-speaker-out cross-validation. Runs may execute in parallel.
/// Writes run_<speaker>/ directories, run_status.json, aggregate.json
/// and the pooled report under out_dir. A failed run leaves the other
/// runs' outputs and the status file in place and the first error is
/// rethrown.
AggregateReport RunCrossValidation(const PreparedCorpus &corpus,
                                   const CrossValOptions &options,
                                   const std::filesystem::path &out_dir);

}  // namespace sapser

#endif  // SAPSER_CROSSVAL_H_
