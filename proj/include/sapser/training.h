// include/sapser/training.h

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

#ifndef SAPSER_TRAINING_H_
#define SAPSER_TRAINING_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sapser/model.h"

namespace sapser {

/// One utterance ready for the model. Targets are already scaled to [0, 1].
struct Example {
  std::string id;
  const Matrix<float> *features = nullptr;
  AlignedMask keep;
  int label = 0;
  float valence = 0;
  float arousal = 0;
};

struct LossBreakdown {
  double total = 0;
  double discrete = 0;
  double valence = 0;
  double arousal = 0;
};

struct EpochRecord {
  size_t epoch = 0;  // 1-based
  double train_loss = 0;
  LossBreakdown val;
  double lr = 0;     // learning rate of the epoch's last update
  size_t fallbacks = 0;
};

struct TrainingDiagnostics {
  std::vector<EpochRecord> epochs;
  std::vector<double> lr_multipliers;  // one per optimizer update
  std::vector<double> class_weights;
  size_t total_steps = 0;
  size_t best_epoch = 0;
  double best_val_loss = 0;
  bool early_stopped = false;
  size_t sap_fallbacks = 0;
  uint64_t seed = 0;
};

struct TrainedModel {
  SerModel<float> model;
  TrainingDiagnostics diagnostics;

  const ModelConfig &config() const { return model.config(); }
};

/// Tracks the best validation loss. Stop once patience consecutive epochs
/// fail to improve on it.
class EarlyStopping {
 public:
  explicit EarlyStopping(size_t patience);

  /// Returns true when val_loss is a new best.
  bool Update(double val_loss);
  bool ShouldStop() const { return bad_epochs_ >= patience_; }
  size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  size_t patience_;
  size_t epoch_ = 0;
  size_t best_epoch_ = 0;
  size_t bad_epochs_ = 0;
  double best_loss_ = 0;
};

/// Class counts over examples, size num_classes.
std::vector<size_t> CountLabels(std::span<const Example> examples,
                                size_t num_classes);

/// Total loss L on a set, with the given class weights.
LossBreakdown EvaluateLoss(const SerModel<float> &model,
                           std::span<const Example> examples,
                           std::span<const double> class_weights);

struct Prediction {
  int label = 0;
  float valence = 0;
  float arousal = 0;
  bool fallback = false;
};

std::vector<Prediction> Predict(const SerModel<float> &model,
                                std::span<const Example> examples);

/// Mini-batch training with the weighted multi-task loss, Adam, warmup and
/// cosine schedule, and early stopping on validation L. Returns the
/// parameters of the best validation epoch. When log is set, writes one
/// JSON record per line (config, step, epoch, summary).
TrainedModel Train(const ModelConfig &config, std::span<const Example> train,
                   std::span<const Example> val, std::ostream *log = nullptr);

}  // namespace sapser

#endif  // SAPSER_TRAINING_H_
