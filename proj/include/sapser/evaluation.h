// include/sapser/evaluation.h

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

#ifndef SAPSER_EVALUATION_H_
#define SAPSER_EVALUATION_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sapser {

/// counts[t][p]: utterances of true class t predicted as p.
struct ConfusionMatrix {
  size_t num_classes = 0;
  std::vector<size_t> counts;  // row-major K x K

  explicit ConfusionMatrix(size_t k = 0) : num_classes(k), counts(k * k, 0) {}
  size_t &at(size_t t, size_t p) { return counts[t * num_classes + p]; }
  size_t at(size_t t, size_t p) const { return counts[t * num_classes + p]; }
  size_t RowSum(size_t t) const;
  size_t Total() const;
  size_t Trace() const;
  void Add(const ConfusionMatrix &other);
  bool operator==(const ConfusionMatrix &) const = default;
};

ConfusionMatrix Confusion(std::span<const int> truth,
                          std::span<const int> predicted, size_t num_classes);

/// Mean per-class recall. Throws kEmptyRow if a class has no samples.
double UnweightedAccuracy(const ConfusionMatrix &cm);
/// Overall accuracy, trace / total.
double WeightedAccuracy(const ConfusionMatrix &cm);

double MeanAbsoluteError(std::span<const float> pred,
                         std::span<const float> target);

/// Two-sided 95% Student-t quantile t_{0.975, df}.
double StudentT975(size_t df);

struct FoldSummary {
  std::vector<double> values;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  double ci_low = 0;
  double ci_high = 0;
};

/// Mean and mean +/- t_{0.975, n-1} * s / sqrt(n). Needs n >= 2.
FoldSummary SummarizeFolds(std::span<const double> values);

using NamedSummary = std::pair<std::string, FoldSummary>;

/// Writes report.json, confusion.csv and confusion.svg into out_dir. The
/// SVG cells show row-normalized percentages. Output contains no
/// timestamps, so identical inputs give identical bytes.
void EmitReport(const ConfusionMatrix &cm,
                std::span<const NamedSummary> summaries,
                std::span<const std::string> class_names,
                const std::filesystem::path &out_dir);

}  // namespace sapser

#endif  // SAPSER_EVALUATION_H_
