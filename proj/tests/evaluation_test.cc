// tests/evaluation_test.cc

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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sapser/evaluation.h"
#include "sapser/rng.h"
#include "test_util.h"

using namespace sapser;
using sapser::testing::CodeOf;
using sapser::testing::ReadBytes;
using sapser::testing::TempDir;

namespace {

// P(T <= x) for Student's t with df degrees of freedom, by Simpson
// integration of the density from 0.
double StudentCdf(double x, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * M_PI);
  auto pdf = [&](double t) { return c * std::pow(1 + t * t / df, -(df + 1) / 2); };
  const int n = 20000;
  const double h = x / n;
  double s = pdf(0) + pdf(x);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(i * h);
  return 0.5 + s * h / 3;
}

double StudentQuantileOracle(double df) {
  double lo = 0, hi = 20;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (StudentCdf(mid, df) < 0.975 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("confusion matrix small example") {
  const std::vector<int> truth{0, 0, 1, 1}, pred{0, 1, 1, 1};
  const ConfusionMatrix cm = Confusion(truth, pred, 2);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 0) == 0);
  CHECK(cm.at(1, 1) == 2);
  CHECK(UnweightedAccuracy(cm) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(WeightedAccuracy(cm) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("perfect and imbalanced predictions") {
  const std::vector<int> t{0, 1, 2, 3, 3, 3};
  const ConfusionMatrix perfect = Confusion(t, t, 4);
  CHECK(UnweightedAccuracy(perfect) == 1.0);
  CHECK(WeightedAccuracy(perfect) == 1.0);
  // Predicting the majority class everywhere: WA 0.5, UA 0.25.
  const std::vector<int> p(6, 3);
  const ConfusionMatrix maj = Confusion(t, p, 4);
  CHECK(WeightedAccuracy(maj) == doctest::Approx(0.5));
  CHECK(UnweightedAccuracy(maj) == doctest::Approx(0.25));
}

TEST_CASE("confusion agrees with direct counting on random pairs") {
  Rng rng(21);
  const size_t n = 10000, k = 4;
  std::vector<int> t(n), p(n);
  for (size_t i = 0; i < n; ++i) {
    t[i] = static_cast<int>(rng.Index(k));
    p[i] = rng.Uniform() < 0.6 ? t[i] : static_cast<int>(rng.Index(k));
  }
  const ConfusionMatrix cm = Confusion(t, p, k);
  CHECK(cm.Total() == n);
  size_t correct = 0;
  double recall_sum = 0;
  for (size_t c = 0; c < k; ++c) {
    size_t row = 0, hit = 0;
    for (size_t i = 0; i < n; ++i) {
      if (t[i] != static_cast<int>(c)) continue;
      ++row;
      hit += p[i] == t[i];
    }
    for (size_t q = 0; q < k; ++q) {
      size_t count = 0;
      for (size_t i = 0; i < n; ++i)
        count += t[i] == static_cast<int>(c) && p[i] == static_cast<int>(q);
      CHECK(cm.at(c, q) == count);
    }
    correct += hit;
    recall_sum += static_cast<double>(hit) / row;
  }
  CHECK(std::abs(WeightedAccuracy(cm) - static_cast<double>(correct) / n) <= 1e-12);
  CHECK(std::abs(UnweightedAccuracy(cm) - recall_sum / k) <= 1e-12);

  // Reordering the utterances changes nothing.
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.Shuffle(perm);
  std::vector<int> t2(n), p2(n);
  for (size_t i = 0; i < n; ++i) {
    t2[i] = t[perm[i]];
    p2[i] = p[perm[i]];
  }
  CHECK(Confusion(t2, p2, k) == cm);
}

TEST_CASE("accuracy errors") {
  const std::vector<int> t{0, 0, 2}, p{0, 1, 2};
  const ConfusionMatrix cm = Confusion(t, p, 3);
  CHECK(CodeOf([&] { UnweightedAccuracy(cm); }) == ErrorCode::kEmptyRow);
  CHECK(WeightedAccuracy(cm) == doctest::Approx(2.0 / 3));
  CHECK(CodeOf([] { WeightedAccuracy(ConfusionMatrix(4)); }) == ErrorCode::kEmptyMatrix);
  const std::vector<int> bad{0, 5};
  CHECK(CodeOf([&] { Confusion(std::vector<int>{0, 1}, bad, 4); }) == ErrorCode::kBadLabel);
  CHECK(CodeOf([&] { Confusion(std::vector<int>{0}, bad, 4); }) == ErrorCode::kShapeMismatch);
  ConfusionMatrix a(3);
  CHECK(CodeOf([&] { a.Add(ConfusionMatrix(4)); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("mean absolute error") {
  const std::vector<float> p{0.1f, 0.5f, 0.9f}, t{0.2f, 0.5f, 0.6f};
  CHECK(MeanAbsoluteError(p, t) == doctest::Approx((0.1 + 0.0 + 0.3) / 3).epsilon(1e-6));
  CHECK(MeanAbsoluteError(p, p) == 0.0);
  CHECK(CodeOf([&] { MeanAbsoluteError(p, std::vector<float>{1}); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("t quantiles match numerical integration") {
  for (size_t df = 1; df <= 60; df += (df < 12 ? 1 : 7)) {
    INFO("df = " << df);
    CHECK(std::abs(StudentT975(df) - StudentQuantileOracle(static_cast<double>(df))) <= 1e-3);
  }
  CHECK(StudentT975(2) == doctest::Approx(4.302653).epsilon(1e-6));
  CHECK(CodeOf([] { StudentT975(0); }) == ErrorCode::kTooFewFolds);
}

TEST_CASE("fold summary of three values") {
  const std::vector<double> v{70, 75, 80};
  const FoldSummary s = SummarizeFolds(v);
  CHECK(s.mean == doctest::Approx(75));
  CHECK(s.stddev == doctest::Approx(5));
  CHECK(std::abs(s.ci_low - 62.58) <= 0.01);
  CHECK(std::abs(s.ci_high - 87.42) <= 0.01);
  CHECK(s.values == v);
}

TEST_CASE("fold summary edge cases") {
  const std::vector<double> same(5, 61.25);
  const FoldSummary s = SummarizeFolds(same);
  CHECK(s.mean == 61.25);
  CHECK(s.stddev == 0.0);
  CHECK(s.ci_low == 61.25);
  CHECK(s.ci_high == 61.25);
  CHECK(CodeOf([] { SummarizeFolds(std::vector<double>{50}); }) == ErrorCode::kTooFewFolds);
  CHECK(CodeOf([] { SummarizeFolds(std::vector<double>{}); }) == ErrorCode::kTooFewFolds);
  CHECK(CodeOf([] { SummarizeFolds(std::vector<double>{1, NAN}); }) ==
        ErrorCode::kNonFiniteEntry);
}

TEST_CASE("confidence interval narrows as folds with the same spread accumulate") {
  double last = 1e300;
  for (size_t n = 2; n <= 40; ++n) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = 60.0 + (i % 2 ? 4.0 : -4.0);
    const FoldSummary s = SummarizeFolds(v);
    const double width = s.ci_high - s.ci_low;
    CHECK(width < last);
    CHECK(s.ci_low <= s.mean);
    CHECK(s.mean <= s.ci_high);
    last = width;
  }
}

TEST_CASE("report files") {
  TempDir dir("report");
  ConfusionMatrix cm(4);
  for (size_t c = 0; c < 4; ++c) cm.at(c, c) = 5 + c;
  const std::vector<std::string> names{"angry", "happy", "neutral", "sad"};
  const std::vector<NamedSummary> sums{{"ua", SummarizeFolds(std::vector<double>{70, 75, 80})}};
  EmitReport(cm, sums, names, dir / "a");
  const std::string svg = ReadBytes(dir / "a" / "confusion.svg");
  CHECK(svg.find("<svg") == 0);
  size_t hundreds = 0;
  for (size_t pos = 0; (pos = svg.find(">100.0%<", pos)) != std::string::npos; ++pos) ++hundreds;
  CHECK(hundreds == 4);
  for (const auto &n : names) CHECK(svg.find(">" + n + "<") != std::string::npos);

  const auto report = nlohmann::json::parse(ReadBytes(dir / "a" / "report.json"));
  CHECK(report["ua"] == 1.0);
  CHECK(report["wa"] == 1.0);
  CHECK(report["total"] == 26);
  CHECK(report["confusion"][3][3] == 8);
  CHECK(report["summaries"]["ua"]["mean"] == 75.0);

  const std::string csv = ReadBytes(dir / "a" / "confusion.csv");
  CHECK(csv.find("angry,5,0,0,0\n") != std::string::npos);

  EmitReport(cm, sums, names, dir / "b");
  for (const char *f : {"report.json", "confusion.csv", "confusion.svg"})
    CHECK(ReadBytes(dir / "a" / f) == ReadBytes(dir / "b" / f));

  sapser::testing::WriteBytes(dir / "file", "x");
  CHECK(CodeOf([&] { EmitReport(cm, sums, names, dir / "file"); }) == ErrorCode::kIoError);
}

TEST_CASE("report with an empty class row stores a null UA") {
  TempDir dir("report");
  ConfusionMatrix cm(4);
  cm.at(0, 0) = 3;
  cm.at(1, 0) = 1;
  const std::vector<std::string> names{"angry", "happy", "neutral", "sad"};
  EmitReport(cm, {}, names, dir.path());
  const auto report = nlohmann::json::parse(ReadBytes(dir / "report.json"));
  CHECK(report["ua"].is_null());
  CHECK(report["wa"] == 0.75);
  CHECK(report["per_class_recall"][2].is_null());
}
