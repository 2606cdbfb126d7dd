// tests/neural_test.cc

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

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sapser/grad_check.h"
#include "sapser/layers.h"
#include "sapser/losses.h"
#include "sapser/optimizer.h"
#include "sapser/rng.h"
#include "test_util.h"

using namespace sapser;
using sapser::testing::CodeOf;

namespace {

Matrix<double> Random(size_t r, size_t c, Rng *rng) {
  Matrix<double> m(r, c);
  for (double &v : m.flat()) v = rng->Normal();
  return m;
}

double MaxAbsDiff(const Matrix<double> &a, const Matrix<double> &b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.flat()[i] - b.flat()[i]));
  return m;
}

// Multi-head attention written out step by step with explicit loops.
Matrix<double> ReferenceAttention(const AttentionBlock<double> &blk, const Matrix<double> &x) {
  const size_t n = x.rows(), d = blk.dim(), heads = blk.heads(), w = d / heads;
  auto project = [&](const Matrix<double> &wt) {
    Matrix<double> out(n, d);
    for (size_t i = 0; i < n; ++i)
      for (size_t o = 0; o < d; ++o) {
        double s = 0;
        for (size_t k = 0; k < d; ++k) s += x(i, k) * wt(o, k);
        out(i, o) = s;
      }
    return out;
  };
  const auto q = project(blk.wq), k = project(blk.wk), v = project(blk.wv);
  Matrix<double> concat(n, d);
  for (size_t h = 0; h < heads; ++h) {
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> score(n);
      double total = 0;
      for (size_t j = 0; j < n; ++j) {
        double s = 0;
        for (size_t c = 0; c < w; ++c) s += q(i, h * w + c) * k(j, h * w + c);
        score[j] = std::exp(s / std::sqrt(static_cast<double>(w)));
        total += score[j];
      }
      for (size_t c = 0; c < w; ++c) {
        double acc = 0;
        for (size_t j = 0; j < n; ++j) acc += score[j] / total * v(j, h * w + c);
        concat(i, h * w + c) = acc;
      }
    }
  }
  Matrix<double> out(n, d);
  for (size_t i = 0; i < n; ++i)
    for (size_t o = 0; o < d; ++o) {
      double s = blk.residual() ? x(i, o) : 0.0;
      for (size_t k2 = 0; k2 < d; ++k2) s += concat(i, k2) * blk.wo(o, k2);
      out(i, o) = s;
    }
  return out;
}

}  // namespace

TEST_CASE("linear layer maps") {
  Rng rng(1);
  LinearLayer<double> id(3, 3);
  for (size_t i = 0; i < 3; ++i) id.weight(i, i) = 1.0;
  const auto x = Random(4, 3, &rng);
  CHECK(id.Forward(x) == x);

  LinearLayer<double> constant(3, 2);
  constant.bias = {1.5, -2.0};
  const auto y = constant.Forward(x);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(y(i, 0) == 1.5);
    CHECK(y(i, 1) == -2.0);
  }

  LinearLayer<double> layer(4, 2);
  layer.InitXavier(&rng);
  layer.bias = {0.3, -0.1};
  const auto in = Random(3, 4, &rng);
  const auto out = layer.Forward(in);
  for (size_t i = 0; i < 3; ++i)
    for (size_t o = 0; o < 2; ++o) {
      double s = layer.bias[o];
      for (size_t k = 0; k < 4; ++k) s += in(i, k) * layer.weight(o, k);
      CHECK(std::abs(out(i, o) - s) <= 1e-6);
    }
  CHECK(CodeOf([&] { layer.Forward(Random(3, 5, &rng)); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("single-token attention mixes values only") {
  Rng rng(2);
  AttentionBlock<double> blk(4, 2, false);
  blk.InitXavier(&rng);
  const auto x = Random(1, 4, &rng);
  const auto y = blk.Forward(x);
  // softmax over one key is 1, so the output is x Wv^T Wo^T.
  Matrix<double> v(1, 4), expected(1, 4);
  for (size_t o = 0; o < 4; ++o)
    for (size_t k = 0; k < 4; ++k) v(0, o) += x(0, k) * blk.wv(o, k);
  for (size_t o = 0; o < 4; ++o)
    for (size_t k = 0; k < 4; ++k) expected(0, o) += v(0, k) * blk.wo(o, k);
  CHECK(MaxAbsDiff(y, expected) <= 1e-12);
}

TEST_CASE("identical tokens give identical outputs") {
  Rng rng(3);
  AttentionBlock<double> blk(6, 3, true);
  blk.InitXavier(&rng);
  const auto row = Random(1, 6, &rng);
  Matrix<double> x(5, 6);
  for (size_t i = 0; i < 5; ++i)
    for (size_t j = 0; j < 6; ++j) x(i, j) = row(0, j);
  const auto y = blk.Forward(x);
  for (size_t i = 1; i < 5; ++i)
    for (size_t j = 0; j < 6; ++j) CHECK(y(i, j) == doctest::Approx(y(0, j)).epsilon(1e-14));
}

TEST_CASE("attention matches a step-by-step reference") {
  Rng rng(4);
  for (bool residual : {false, true}) {
    AttentionBlock<double> blk(8, 2, residual);
    blk.InitXavier(&rng);
    const auto x = Random(5, 8, &rng);
    CHECK(MaxAbsDiff(blk.Forward(x), ReferenceAttention(blk, x)) <= 1e-5);
    AttentionBlock<float> f = blk.Cast<float>();
    const auto yf = f.Forward(x.Cast<float>()).Cast<double>();
    CHECK(MaxAbsDiff(yf, ReferenceAttention(blk, x)) <= 1e-4);
  }
}

TEST_CASE("attention probabilities are normalized") {
  Rng rng(5);
  AttentionBlock<double> blk(4, 2, true);
  blk.InitXavier(&rng);
  AttentionCache<double> cache;
  blk.Forward(Random(7, 4, &rng), &cache);
  REQUIRE(cache.probs.size() == 2);
  for (const auto &p : cache.probs)
    for (size_t i = 0; i < p.rows(); ++i) {
      double s = 0;
      for (double v : p.row(i)) s += v;
      CHECK(std::abs(s - 1.0) <= 1e-6);
    }
}

TEST_CASE("stabilized softmax is shift invariant and sums to one") {
  Rng rng(6);
  Matrix<double> a = Random(4, 5, &rng);
  Matrix<double> b = a;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 5; ++j) b(i, j) += 700.0 * (i + 1);  // would overflow exp
  SoftmaxRows(&a);
  SoftmaxRows(&b);
  CHECK(MaxAbsDiff(a, b) <= 1e-12);
  for (size_t i = 0; i < 4; ++i) {
    double s = 0;
    for (double v : b.row(i)) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("attention backward basics") {
  Rng rng(7);
  AttentionBlock<double> plain(4, 2, false);
  plain.InitXavier(&rng);
  AttentionBlock<double> res(4, 2, true);
  res.wq = plain.wq;
  res.wk = plain.wk;
  res.wv = plain.wv;
  res.wo = plain.wo;
  const auto x = Random(6, 4, &rng);

  AttentionCache<double> c1, c2;
  plain.Forward(x, &c1);
  res.Forward(x, &c2);
  auto g0 = plain.ZeroGrad();
  const auto dx0 = plain.Backward(c1, Matrix<double>(6, 4), &g0);
  for (double v : dx0.flat()) CHECK(v == 0.0);
  for (auto *m : {&g0.wq, &g0.wk, &g0.wv, &g0.wo})
    for (double v : m->flat()) CHECK(v == 0.0);

  const auto dy = Random(6, 4, &rng);
  auto g1 = plain.ZeroGrad(), g2 = res.ZeroGrad();
  const auto dx1 = plain.Backward(c1, dy, &g1);
  const auto dx2 = res.Backward(c2, dy, &g2);
  for (size_t i = 0; i < dx1.size(); ++i)
    CHECK(dx2.flat()[i] == doctest::Approx(dx1.flat()[i] + dy.flat()[i]).epsilon(1e-14));
  CHECK(g1.wq == g2.wq);
  CHECK(CodeOf([&] { plain.Backward(c1, Random(5, 4, &rng), &g1); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(CodeOf([] { AttentionBlock<double>(6, 4, true); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { plain.Forward(Random(3, 5, &rng)); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("weighted cross-entropy values") {
  const Matrix<double> uniform(3, 4);
  const std::vector<int> labels{0, 2, 3};
  const std::vector<double> ones(4, 1.0);
  CHECK(WeightedCrossEntropy<double>(uniform, labels, ones).loss ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(std::abs(std::log(4.0) - 1.3863) < 1e-4);

  Rng rng(8);
  const auto logits = Random(1, 4, &rng);
  const std::vector<int> one{2};
  const double a = WeightedCrossEntropy<double>(logits, one, std::vector<double>{1, 1, 0.1, 1}).loss;
  const double b = WeightedCrossEntropy<double>(logits, one, std::vector<double>{1, 1, 7.0, 1}).loss;
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("uniform weights give plain cross-entropy") {
  Rng rng(9);
  const auto logits = Random(6, 3, &rng);
  const std::vector<int> labels{0, 1, 2, 2, 1, 0};
  double plain = 0;
  for (size_t i = 0; i < 6; ++i) {
    double z = 0;
    for (size_t c = 0; c < 3; ++c) z += std::exp(logits(i, c));
    plain += std::log(z) - logits(i, labels[i]);
  }
  plain /= 6;
  const auto ce = WeightedCrossEntropy<double>(logits, labels, std::vector<double>(3, 2.5));
  CHECK(ce.loss == doctest::Approx(plain).epsilon(1e-13));
}

TEST_CASE("cross-entropy preconditions") {
  const Matrix<double> logits(2, 3);
  CHECK(CodeOf([&] {
          WeightedCrossEntropy<double>(logits, std::vector<int>{0, 3}, std::vector<double>(3, 1));
        }) == ErrorCode::kBadLabel);
  CHECK(CodeOf([&] {
          WeightedCrossEntropy<double>(logits, std::vector<int>{0, -1}, std::vector<double>(3, 1));
        }) == ErrorCode::kBadLabel);
  CHECK(CodeOf([&] {
          WeightedCrossEntropy<double>(logits, std::vector<int>{0, 1}, std::vector<double>{1, 0, 1});
        }) == ErrorCode::kNonPositiveWeight);
  CHECK(CodeOf([&] {
          WeightedCrossEntropy<double>(logits, std::vector<int>{0}, std::vector<double>(3, 1));
        }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("class weights") {
  const std::vector<size_t> counts{1103, 1636, 1708, 1084};
  const auto w = ClassWeights(counts);
  const double n = 1103 + 1636 + 1708 + 1084;
  const std::vector<double> approx{1.2537, 0.8452, 0.8095, 1.2757};
  for (size_t c = 0; c < 4; ++c) {
    CHECK(std::abs(w[c] - n / (4.0 * counts[c])) <= 1e-9);
    CHECK(std::abs(w[c] - approx[c]) <= 1.5e-4);  // four-decimal figures
  }
  CHECK(ClassWeights(std::vector<size_t>{10, 10, 10, 10}) == std::vector<double>{1, 1, 1, 1});
  const auto two = ClassWeights(std::vector<size_t>{1, 3});
  CHECK(two[0] == doctest::Approx(2.0));
  CHECK(two[1] == doctest::Approx(2.0 / 3.0));
  CHECK(CodeOf([] { ClassWeights(std::vector<size_t>{3, 0, 2}); }) == ErrorCode::kEmptyClass);
}

TEST_CASE("MAE values and tie rule") {
  const std::vector<double> p{0.5, -1, 2};
  const auto same = MaeLoss<double>(p, p);
  CHECK(same.loss == 0.0);
  for (double g : same.grad) CHECK(g == 0.0);
  const auto m = MaeLoss<double>(std::vector<double>{1, 3}, std::vector<double>{0, 1});
  CHECK(m.loss == 1.5);
  CHECK(m.grad == std::vector<double>{0.5, 0.5});
  const auto neg = MaeLoss<double>(std::vector<double>{0, 1}, std::vector<double>{1, 1});
  CHECK(neg.grad == std::vector<double>{-0.5, 0.0});
  CHECK(CodeOf([] { MaeLoss<double>(std::vector<double>{1}, std::vector<double>{1, 2}); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("multi-task loss") {
  const MtlWeights w;
  CHECK(w.alpha == 0.5);
  CHECK(w.beta == 0.25);
  CHECK(w.gamma == 0.25);
  CHECK(MtlLoss(2, 4, 4, w) == 3.0);
  CHECK(MtlLoss(2, 4, 4, MtlWeights{0.7, 0, 0}) == doctest::Approx(1.4));
  CHECK(MtlLoss(0, 0, 0, w) == 0.0);
}

TEST_CASE("learning-rate schedule") {
  const size_t total = 100;
  CHECK(WarmupSteps(total, 0.1) == 10);
  CHECK(LrSchedule(0, total, 0.1) == 0.0);
  CHECK(LrSchedule(5, total, 0.1) == 0.5);
  CHECK(LrSchedule(10, total, 0.1) == 1.0);
  CHECK(LrSchedule(total, total, 0.1) == 0.0);
  // Continuity at the warmup boundary and monotone decay afterwards.
  CHECK(std::abs(LrSchedule(9, total, 0.1) - LrSchedule(10, total, 0.1)) <= 0.1 + 1e-12);
  for (size_t s = 10; s + 1 <= total; ++s)
    REQUIRE(LrSchedule(s + 1, total, 0.1) <= LrSchedule(s, total, 0.1));
  for (size_t s = 0; s <= total; ++s) {
    const double m = LrSchedule(s, total, 0.1);
    REQUIRE(m >= 0.0);
    REQUIRE(m <= 1.0);
  }
  // Cosine half-way point between warmup end and the last step.
  CHECK(LrSchedule(55, total, 0.1) == doctest::Approx(0.5).epsilon(1e-12));
  // A fine grid approaches continuity at the boundary.
  CHECK(std::abs(LrSchedule(999, 10000, 0.1) - LrSchedule(1000, 10000, 0.1)) <= 1e-3 + 1e-12);
}

TEST_CASE("Adam first step moves by the learning rate against the gradient") {
  std::vector<double> p{1.0, -2.0, 0.5}, g{0.3, -4.0, 1e-3};
  std::vector<ParamBlock<double>> params{{"p", std::span<double>(p), {3}}};
  std::vector<ParamBlock<double>> grads{{"p", std::span<double>(g), {3}}};
  Adam<double> opt(0.01, 10, 0.0);
  const double lr = opt.Step(params, grads);
  CHECK(lr == 0.01);
  CHECK(p[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("Adam with zero gradients leaves parameters alone") {
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
  std::vector<ParamBlock<double>> params{{"p", std::span<double>(p), {2}}};
  std::vector<ParamBlock<double>> grads{{"p", std::span<double>(g), {2}}};
  Adam<double> opt(0.1, 50, 0.1);
  for (int i = 0; i < 50; ++i) opt.Step(params, grads);
  CHECK(p == std::vector<double>{1.0, -2.0});
}

TEST_CASE("Adam matches a hand-unrolled trace on a quadratic") {
  // f(x) = 0.5 * a * x^2, gradient a * x; 3 steps with warmup 1 of 4 steps.
  const double a = 3.0, base = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double x = 2.0;
  std::vector<double> p{x}, g{0.0};
  std::vector<ParamBlock<double>> params{{"x", std::span<double>(p), {1}}};
  std::vector<ParamBlock<double>> grads{{"x", std::span<double>(g), {1}}};
  Adam<double> opt(base, 4, 0.25);
  for (int i = 0; i < 3; ++i) {
    g[0] = a * p[0];
    opt.Step(params, grads);
  }
  // Multipliers: step 0 -> 0 (warmup start), step 1 -> 1, step 2 -> cos decay.
  const double mult1 = 1.0, mult2 = 0.5 * (1.0 + std::cos(std::numbers::pi / 3.0));
  double m = 0, v = 0;
  // step 1 (lr 0)
  double g1 = a * x;
  m = b1 * m + (1 - b1) * g1;
  v = b2 * v + (1 - b2) * g1 * g1;
  // step 2
  double g2 = a * x;
  m = b1 * m + (1 - b1) * g2;
  v = b2 * v + (1 - b2) * g2 * g2;
  x -= base * mult1 * (m / (1 - b1 * b1)) / (std::sqrt(v / (1 - b2 * b2)) + eps);
  // step 3
  double g3 = a * x;
  m = b1 * m + (1 - b1) * g3;
  v = b2 * v + (1 - b2) * g3 * g3;
  x -= base * mult2 * (m / (1 - b1 * b1 * b1)) / (std::sqrt(v / (1 - b2 * b2 * b2)) + eps);
  CHECK(std::abs(p[0] - x) <= 1e-10);
  CHECK(opt.step_count() == 3);
}

TEST_CASE("Adam shape checks") {
  std::vector<double> p{1.0, 2.0}, g{1.0};
  std::vector<ParamBlock<double>> params{{"p", std::span<double>(p), {2}}};
  std::vector<ParamBlock<double>> grads{{"p", std::span<double>(g), {1}}};
  Adam<double> opt(0.1, 10, 0.1);
  CHECK(CodeOf([&] { opt.Step(params, grads); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("finite-difference checks of each fragment") {
  const auto report = RunGradCheckSuite(123, 20);
  REQUIRE(report.size() == 6);
  for (const auto &f : report) {
    INFO(f.fragment);
    CHECK(f.instances == 20);
    CHECK(f.max_rel_error < 1e-4);
    if (f.fragment == "linear") CHECK(f.max_rel_error < 1e-6);
  }
}

TEST_CASE("a sign-flipped backward fails the check") {
  Rng rng(10);
  LinearLayer<double> layer(3, 2);
  layer.InitXavier(&rng);
  const auto x = Random(4, 3, &rng);
  const auto w = Random(4, 2, &rng);
  auto grad = layer.ZeroGrad();
  layer.Backward(x, w, &grad);
  for (double &v : grad.weight.flat()) v = -v;
  for (double &v : grad.bias) v = -v;
  std::vector<ParamBlock<double>> params, analytic;
  layer.Append("l", &params);
  grad.Append("l", &analytic);
  const auto report = GradCheck(
      [&] {
        const auto y = layer.Forward(x);
        double s = 0;
        for (size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * w.flat()[i];
        return s;
      },
      params, analytic);
  CHECK(report.max_rel_error > 1e-1);
  CHECK_FALSE(report.Passed(1e-4));

  grad.bias[0] = std::nan("");
  CHECK(CodeOf([&] { GradCheck([] { return 0.0; }, params, analytic); }) ==
        ErrorCode::kNonFiniteGradient);
}

TEST_CASE("relative error definition") {
  CHECK(RelativeError(1.0, 1.0) == 0.0);
  CHECK(RelativeError(2.0, 1.0) == 0.5);
  CHECK(RelativeError(0.0, 1e-12) == doctest::Approx(1e-4));  // floor of 1e-8
}
