// src/evaluation.cc

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

#include "sapser/evaluation.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "sapser/error.h"

namespace sapser {
namespace {

using json = nlohmann::json;

// t_{0.975, df} for df = 1..40.
constexpr std::array<double, 40> kT975 = {
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582,
    2.446912,  2.364624, 2.306004, 2.262157, 2.228139,
    2.200985,  2.178813, 2.160369, 2.144787, 2.131450,
    2.119905,  2.109816, 2.100922, 2.093024, 2.085963,
    2.079614,  2.073873, 2.068658, 2.063899, 2.059539,
    2.055529,  2.051831, 2.048407, 2.045230, 2.042272,
    2.039513,  2.036933, 2.034515, 2.032245, 2.030108,
    2.028094,  2.026192, 2.024394, 2.022691, 2.021075};

void WriteFile(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string RenderSvg(const ConfusionMatrix &cm,
                      std::span<const std::string> names) {
  const size_t k = cm.num_classes;
  const int cell = 80, left = 90, top = 60;
  const int width = left + static_cast<int>(k) * cell + 20;
  const int height = top + static_cast<int>(k) * cell + 50;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(width) + "\" height=\"" + std::to_string(height) +
       "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t t = 0; t < k; ++t) {
    const size_t row = cm.RowSum(t);
    for (size_t p = 0; p < k; ++p) {
      const double frac = row ? static_cast<double>(cm.at(t, p)) / row : 0.0;
      // White to dark blue.
      const int r = static_cast<int>(std::lround(255 - 215 * frac));
      const int g = static_cast<int>(std::lround(255 - 175 * frac));
      const int b = static_cast<int>(std::lround(255 - 95 * frac));
      const int x = left + static_cast<int>(p) * cell;
      const int y = top + static_cast<int>(t) * cell;
      s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
           "\" width=\"" + std::to_string(cell) + "\" height=\"" +
           std::to_string(cell) + "\" fill=\"rgb(" + std::to_string(r) + "," +
           std::to_string(g) + "," + std::to_string(b) +
           ")\" stroke=\"#888\"/>\n";
      s += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" +
           std::to_string(y + cell / 2 + 5) + "\" text-anchor=\"middle\" fill=\"" +
           (frac > 0.5 ? "white" : "black") + "\">" + Fixed(100.0 * frac, 1) +
           "%</text>\n";
    }
  }
  for (size_t c = 0; c < k; ++c) {
    const std::string name = c < names.size() ? names[c] : std::to_string(c);
    s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
         std::to_string(top + static_cast<int>(c) * cell + cell / 2 + 5) +
         "\" text-anchor=\"end\">" + name + "</text>\n";
    s += "<text x=\"" + std::to_string(left + static_cast<int>(c) * cell + cell / 2) +
         "\" y=\"" + std::to_string(top - 10) + "\" text-anchor=\"middle\">" +
         name + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(left + static_cast<int>(k) * cell / 2) +
       "\" y=\"" + std::to_string(top - 35) +
       "\" text-anchor=\"middle\">predicted</text>\n";
  s += "<text x=\"" + std::to_string(left + static_cast<int>(k) * cell / 2) +
       "\" y=\"" + std::to_string(height - 15) +
       "\" text-anchor=\"middle\">rows: true class, row-normalized</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace

size_t ConfusionMatrix::RowSum(size_t t) const {
  size_t s = 0;
  for (size_t p = 0; p < num_classes; ++p) s += at(t, p);
  return s;
}

size_t ConfusionMatrix::Total() const {
  size_t s = 0;
  for (size_t c : counts) s += c;
  return s;
}

size_t ConfusionMatrix::Trace() const {
  size_t s = 0;
  for (size_t c = 0; c < num_classes; ++c) s += at(c, c);
  return s;
}

void ConfusionMatrix::Add(const ConfusionMatrix &other) {
  if (other.num_classes != num_classes)
    Fail(ErrorCode::kShapeMismatch, "confusion matrices of different size");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix Confusion(std::span<const int> truth,
                          std::span<const int> predicted, size_t num_classes) {
  if (truth.size() != predicted.size())
    Fail(ErrorCode::kShapeMismatch, "label sequences differ in length");
  ConfusionMatrix cm(num_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<size_t>(t) >= num_classes ||
        static_cast<size_t>(p) >= num_classes)
      Fail(ErrorCode::kBadLabel, "label pair (" + std::to_string(t) + ", " +
                                     std::to_string(p) + ")");
    ++cm.at(t, p);
  }
  return cm;
}

double UnweightedAccuracy(const ConfusionMatrix &cm) {
  if (cm.num_classes == 0) Fail(ErrorCode::kEmptyMatrix, "no classes");
  double sum = 0.0;
  for (size_t c = 0; c < cm.num_classes; ++c) {
    const size_t row = cm.RowSum(c);
    if (row == 0)
      Fail(ErrorCode::kEmptyRow, "class " + std::to_string(c) + " has no samples");
    sum += static_cast<double>(cm.at(c, c)) / row;
  }
  return sum / cm.num_classes;
}

double WeightedAccuracy(const ConfusionMatrix &cm) {
  const size_t total = cm.Total();
  if (total == 0) Fail(ErrorCode::kEmptyMatrix, "empty confusion matrix");
  return static_cast<double>(cm.Trace()) / total;
}

double MeanAbsoluteError(std::span<const float> pred,
                         std::span<const float> target) {
  if (pred.size() != target.size())
    Fail(ErrorCode::kShapeMismatch, "MAE lengths differ");
  if (pred.empty()) Fail(ErrorCode::kEmptyMatrix, "MAE of nothing");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i)
    s += std::abs(static_cast<double>(pred[i]) - target[i]);
  return s / pred.size();
}

double StudentT975(size_t df) {
  if (df == 0) Fail(ErrorCode::kTooFewFolds, "t quantile needs df >= 1");
  if (df <= kT975.size()) return kT975[df - 1];
  // Cornish-Fisher expansion around the normal quantile.
  const double z = 1.959963984540054, n = static_cast<double>(df);
  const double z3 = z * z * z, z5 = z3 * z * z;
  return z + (z3 + z) / (4 * n) + (5 * z5 + 16 * z3 + 3 * z) / (96 * n * n);
}

FoldSummary SummarizeFolds(std::span<const double> values) {
  if (values.size() < 2)
    Fail(ErrorCode::kTooFewFolds,
         "need at least 2 folds, got " + std::to_string(values.size()));
  FoldSummary s;
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNonFiniteEntry, "fold value");
    sum += v;
  }
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / (n - 1));
  const double half = StudentT975(values.size() - 1) * s.stddev / std::sqrt(n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

void EmitReport(const ConfusionMatrix &cm,
                std::span<const NamedSummary> summaries,
                std::span<const std::string> class_names,
                const std::filesystem::path &out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    Fail(ErrorCode::kIoError, "cannot create " + out_dir.string());
  const size_t k = cm.num_classes;

  json report;
  report["classes"] = std::vector<std::string>(class_names.begin(), class_names.end());
  json rows = json::array();
  for (size_t t = 0; t < k; ++t) {
    json row = json::array();
    for (size_t p = 0; p < k; ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  report["confusion"] = rows;
  report["total"] = cm.Total();
  report["wa"] = cm.Total() ? json(WeightedAccuracy(cm)) : json(nullptr);
  bool all_rows = k > 0;
  for (size_t t = 0; t < k; ++t) all_rows = all_rows && cm.RowSum(t) > 0;
  report["ua"] = all_rows ? json(UnweightedAccuracy(cm)) : json(nullptr);
  json recall = json::array();
  for (size_t t = 0; t < k; ++t) {
    const size_t row = cm.RowSum(t);
    recall.push_back(row ? json(static_cast<double>(cm.at(t, t)) / row)
                         : json(nullptr));
  }
  report["per_class_recall"] = recall;
  json sums = json::object();
  for (const auto &[name, s] : summaries)
    sums[name] = {{"values", s.values}, {"mean", s.mean},
                  {"stddev", s.stddev}, {"ci_low", s.ci_low},
                  {"ci_high", s.ci_high}};
  report["summaries"] = sums;
  WriteFile(out_dir / "report.json", report.dump(2) + "\n");

  std::string csv = "true\\pred";
  for (size_t p = 0; p < k; ++p)
    csv += "," + (p < class_names.size() ? class_names[p] : std::to_string(p));
  csv += "\n";
  for (size_t t = 0; t < k; ++t) {
    csv += t < class_names.size() ? class_names[t] : std::to_string(t);
    for (size_t p = 0; p < k; ++p) csv += "," + std::to_string(cm.at(t, p));
    csv += "\n";
  }
  WriteFile(out_dir / "confusion.csv", csv);
  WriteFile(out_dir / "confusion.svg", RenderSvg(cm, class_names));
}

}  // namespace sapser
