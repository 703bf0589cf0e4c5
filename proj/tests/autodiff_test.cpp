// Copyright 2026 The dpgnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpgnn/autodiff.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "dpgnn/graph_ops.hpp"
#include "dpgnn/losses.hpp"
#include "dpgnn/tensor.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace dpgnn {
namespace {

using testing::MaxGradientError;
using testing::RandomTensor;

constexpr double kGradTol = 1e-4;

TEST(ParameterSetTest, FlattenUnflattenRoundTrip) {
  ParameterSet p;
  p.Add("a", Tensor::Random(2, 3));
  p.Add("b", Tensor::Random(1, 4));
  EXPECT_EQ(p.size(), 10u);
  EXPECT_EQ(p.num_tensors(), 2u);
  const Vector flat = p.Flatten();
  ParameterSet q = p;
  q.at("a").setZero();
  q.at("b").setZero();
  q.Unflatten(std::span<const double>(flat.data(), static_cast<std::size_t>(flat.size())));
  EXPECT_EQ(q.at("a"), p.at("a"));
  EXPECT_EQ(q.at("b"), p.at("b"));
  EXPECT_EQ(q.Flatten(), flat);
}

TEST(ParameterSetTest, FlattenOrderIsInsertionOrderRowMajor) {
  ParameterSet p;
  Tensor a(2, 2);
  a << 1, 2, 3, 4;
  p.Add("a", a);
  p.Add("b", Tensor::Constant(1, 1, 5.0));
  const Vector flat = p.Flatten();
  ASSERT_EQ(flat.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(flat(i), i + 1.0);
}

TEST(ParameterSetTest, RejectsDuplicateNamesAndWrongLength) {
  ParameterSet p;
  p.Add("a", Tensor::Zero(1, 1));
  EXPECT_THROW(p.Add("a", Tensor::Zero(1, 1)), InvalidArgument);
  std::vector<double> wrong(3);
  EXPECT_THROW(p.Unflatten(wrong), InvalidArgument);
  EXPECT_THROW(p.at("missing"), InvalidArgument);
}

TEST(LossBceTest, KnownValues) {
  EXPECT_NEAR(LossBce(0.0, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(LossBce(0.0, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(LossBce(1000.0, 1), 0.0, 1e-300);
  EXPECT_NEAR(LossBce(-1000.0, 1), 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(LossBce(1000.0, 0)));
  EXPECT_THROW(LossBce(0.0, 2), InvalidArgument);
}

TEST(LossCeTest, UniformLogitsGiveLogK) {
  for (int k : {2, 3, 7}) {
    const std::vector<double> z(static_cast<std::size_t>(k), 0.3);
    EXPECT_NEAR(LossCe(z, 0), std::log(static_cast<double>(k)), 1e-14);
  }
}

TEST(LossCeTest, LargeMarginIsPrecise) {
  const std::vector<double> z = {10.0, -10.0};
  // log(1 + exp(-20)) from 40-digit decimal arithmetic.
  const double expected = 2.0611536203143807e-09;
  EXPECT_NEAR(LossCe(z, 0), expected, expected * 1e-10);
}

TEST(LossCeTest, ShiftInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> z = {n(rng), n(rng), n(rng), n(rng)};
    const double base = LossCe(z, trial % 4);
    for (double& v : z) v += 123.456;
    EXPECT_NEAR(LossCe(z, trial % 4), base, 1e-12);
  }
}

TEST(LossCeTest, RejectsLabelOutOfRange) {
  const std::vector<double> z = {0.0, 0.0};
  EXPECT_THROW(LossCe(z, 2), InvalidArgument);
}

TEST(TapeTest, LogisticNeuronGradients) {
  // Zero weights: dL/dz = sigmoid(0) - y = 0.5 - y and dL/dw = (0.5 - y) x.
  for (int y : {0, 1}) {
    ad::Tape tape;
    Tensor xv(1, 3);
    xv << 1.5, -2.0, 0.25;
    const ad::Var x = tape.Constant(xv);
    const ad::Var w = tape.Leaf(Tensor::Zero(3, 1), true);
    const ad::Var z = ad::MatMul(x, w);
    const std::vector<int> labels = {y};
    tape.Backward(ad::ClassificationLoss(z, labels));
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(w.grad()(i, 0), (0.5 - y) * xv(0, i), 1e-15);
    }
  }
}

TEST(TapeTest, BackwardRequiresScalarRoot) {
  ad::Tape tape;
  const ad::Var x = tape.Leaf(Tensor::Zero(2, 1), true);
  EXPECT_THROW(tape.Backward(x), InvalidArgument);
}

TEST(TapeTest, ConstantsReceiveNoGradient) {
  ad::Tape tape;
  const ad::Var a = tape.Constant(Tensor::Ones(1, 2));
  const ad::Var b = tape.Leaf(Tensor::Ones(2, 1), true);
  tape.Backward(ad::MatMul(a, b));
  EXPECT_EQ(a.grad().size(), 0);
  EXPECT_EQ(b.grad(), Tensor::Ones(2, 1));
}

TEST(TapeTest, RepeatedBackwardDoesNotAccumulate) {
  ad::Tape tape;
  const ad::Var a = tape.Leaf(Tensor::Constant(1, 1, 3.0), true);
  const ad::Var y = ad::MatMul(a, a);
  tape.Backward(y);
  tape.Backward(y);
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 6.0);
}

TEST(GradientCheckTest, MatMulAddRowVectorAdd) {
  std::mt19937_64 rng(2);
  const auto f = [](ad::Tape&, const std::vector<ad::Var>& v) {
    const ad::Var h = ad::AddRowVector(ad::MatMul(v[0], v[1]), v[2]);
    const ad::Var s = ad::Add(h, v[3]);
    return ad::MatMul(ad::MatMul(v[4], s), v[5]);
  };
  const double err = MaxGradientError(
      f, {RandomTensor(4, 3, rng), RandomTensor(3, 2, rng), RandomTensor(1, 2, rng),
          RandomTensor(4, 2, rng), RandomTensor(1, 4, rng), RandomTensor(2, 1, rng)});
  EXPECT_LT(err, kGradTol);
}

TEST(GradientCheckTest, Relu) {
  std::mt19937_64 rng(3);
  Tensor x = RandomTensor(5, 3, rng);
  // Keep entries away from the kink.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.3;
  }
  const auto f = [](ad::Tape&, const std::vector<ad::Var>& v) {
    return ad::MatMul(ad::MatMul(v[1], ad::Relu(v[0])), v[2]);
  };
  EXPECT_LT(MaxGradientError(f, {x, RandomTensor(1, 5, rng), RandomTensor(3, 1, rng)}),
            kGradTol);
}

TEST(GradientCheckTest, BinaryCrossEntropy) {
  std::mt19937_64 rng(4);
  const std::vector<int> labels = {0, 1, 1, 0, 1};
  const auto f = [&](ad::Tape&, const std::vector<ad::Var>& v) {
    return ad::ClassificationLoss(v[0], labels);
  };
  EXPECT_LT(MaxGradientError(f, {RandomTensor(5, 1, rng, 3.0)}), kGradTol);
}

TEST(GradientCheckTest, CrossEntropy) {
  std::mt19937_64 rng(5);
  const std::vector<int> labels = {0, 2, 1, 3};
  const auto f = [&](ad::Tape&, const std::vector<ad::Var>& v) {
    return ad::ClassificationLoss(v[0], labels);
  };
  EXPECT_LT(MaxGradientError(f, {RandomTensor(4, 4, rng, 3.0)}), kGradTol);
}

TEST(ClassificationLossTest, MeanOfPerExampleLosses) {
  Tensor z(3, 1);
  z << 0.3, -1.2, 2.0;
  const std::vector<int> y = {1, 0, 0};
  ad::Tape tape;
  const double got = ad::ClassificationLoss(tape.Constant(z), y).value()(0, 0);
  const double want = (LossBce(0.3, 1) + LossBce(-1.2, 0) + LossBce(2.0, 0)) / 3.0;
  EXPECT_NEAR(got, want, 1e-15);
}

TEST(DropoutTest, InvertedScalingAndGradientMask) {
  std::mt19937_64 rng(6);
  ad::Tape tape;
  const ad::Var x = tape.Leaf(Tensor::Ones(200, 50), true);
  const ad::Var y = ad::Dropout(x, 0.2, rng);
  int kept = 0;
  for (Eigen::Index i = 0; i < y.value().size(); ++i) {
    const double v = y.value().data()[i];
    if (v != 0.0) {
      EXPECT_DOUBLE_EQ(v, 1.25);
      ++kept;
    }
  }
  EXPECT_NEAR(kept / 10000.0, 0.8, 0.02);
  tape.Backward(ad::MatMul(ad::MatMul(tape.Constant(Tensor::Ones(1, 200)), y),
                           tape.Constant(Tensor::Ones(50, 1))));
  EXPECT_EQ(x.grad(), y.value());
}

TEST(DropoutTest, ZeroRateIsIdentity) {
  std::mt19937_64 rng(7);
  ad::Tape tape;
  const ad::Var x = tape.Leaf(Tensor::Random(3, 3), true);
  EXPECT_EQ(ad::Dropout(x, 0.0, rng).value(), x.value());
}

}  // namespace
}  // namespace dpgnn
