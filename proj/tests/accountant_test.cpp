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

#include "dpgnn/accountant.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace dpgnn {
namespace {

using testing::AnalyticGaussianEpsilon;
using testing::SubsampledGaussianRdpOracle;

TEST(RdpGaussianTest, Formula) {
  EXPECT_DOUBLE_EQ(RdpGaussian(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(RdpGaussian(2, 10), 0.01);
  EXPECT_DOUBLE_EQ(RdpGaussian(8, 3), 4 * RdpGaussian(2, 3));
  EXPECT_THROW(RdpGaussian(1.0, 1), InvalidArgument);
  EXPECT_THROW(RdpGaussian(2, 0), InvalidArgument);
}

TEST(RdpSubsampledTest, MatchesHighPrecisionOracleOnGrid) {
  for (double q : {0.001, 0.01, 0.1, 0.5, 1.0}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      for (int order : {2, 4, 8, 32, 128}) {
        const double oracle = SubsampledGaussianRdpOracle(order, q, sigma);
        const double got = RdpSubsampledGaussian(order, q, sigma);
        EXPECT_LE(std::abs(got - oracle), 1e-12 * std::abs(oracle))
            << "q=" << q << " sigma=" << sigma << " order=" << order;
      }
    }
  }
}

TEST(RdpSubsampledTest, Boundaries) {
  for (int order : {2, 3, 17, 256}) {
    EXPECT_NEAR(RdpSubsampledGaussian(order, 1.0, 1.3), RdpGaussian(order, 1.3), 1e-12);
    EXPECT_EQ(RdpSubsampledGaussian(order, 0.0, 1.3), 0.0);
  }
  EXPECT_THROW(RdpSubsampledGaussian(1, 0.5, 1), InvalidArgument);
  EXPECT_THROW(RdpSubsampledGaussian(2, 1.5, 1), InvalidArgument);
}

TEST(RdpSubsampledTest, AmplificationBySubsampling) {
  for (double q : {0.01, 0.3, 0.9}) {
    for (double sigma : {0.5, 1.0, 2.3}) {
      for (int order = 2; order <= 256; order += 7) {
        EXPECT_LE(RdpSubsampledGaussian(order, q, sigma), RdpGaussian(order, sigma));
      }
    }
  }
}

TEST(StepCurveTest, FractionalOrdersOnlyWithoutSubsampling) {
  EXPECT_EQ(StepCurve(1.0, 1.0).size(), 258u);
  const RdpCurve c = StepCurve(0.1, 1.0);
  EXPECT_EQ(c.size(), 255u);
  EXPECT_EQ(c.orders.front(), 2.0);
  for (double v : c.values) EXPECT_GE(v, 0.0);
}

TEST(ComposeTest, Additivity) {
  const RdpCurve one = StepCurve(0.05, 1.1);
  const RdpCurve zero = Compose(one, 0);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  const RdpCurve two = Compose(one, 2);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(two.values[i], 2 * one.values[i]);
  const RdpCurve split = ComposeCurves(Compose(one, 10), Compose(one, 5));
  const RdpCurve joint = Compose(one, 15);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_NEAR(split.values[i], joint.values[i], 1e-12 * joint.values[i]);
  }
}

TEST(ToEpsDeltaTest, SingleGaussianStepMatchesContinuousOptimum) {
  const double l = std::log(1e5);
  const double a = 1.0 + std::sqrt(2.0 * l);
  const double continuous = a / 2.0 + l / (a - 1.0);
  EXPECT_NEAR(continuous, 5.2985, 1e-4);
  const EpsilonResult r = ToEpsDelta(StepCurve(1.0, 1.0), 1e-5);
  EXPECT_NEAR(r.epsilon, continuous, 0.01);
  EXPECT_GE(r.epsilon, continuous);
}

TEST(ToEpsDeltaTest, ZeroCurveHitsGridBoundary) {
  const RdpCurve zero = Compose(StepCurve(0.1, 1.0), 0);
  const EpsilonResult r = ToEpsDelta(zero, 1e-3);
  EXPECT_DOUBLE_EQ(r.epsilon, std::log(1e3) / 255.0);
  EXPECT_EQ(r.order, 256.0);
}

TEST(ToEpsDeltaTest, NeverExceedsAnySingleOrder) {
  const RdpCurve c = Compose(StepCurve(0.04, 1.0), 300);
  const EpsilonResult r = ToEpsDelta(c, 1e-3);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_LE(r.epsilon, c.values[i] + std::log(1e3) / (c.orders[i] - 1.0));
  }
}

TEST(ToEpsDeltaTest, MonotoneInDelta) {
  const RdpCurve c = Compose(StepCurve(0.04, 1.5), 100);
  double prev = ToEpsDelta(c, 1e-8).epsilon;
  for (double delta : {1e-6, 1e-4, 1e-2, 0.5}) {
    const double eps = ToEpsDelta(c, delta).epsilon;
    EXPECT_LE(eps, prev);
    prev = eps;
  }
  EXPECT_THROW(ToEpsDelta(RdpCurve{}, 1e-5), InvalidArgument);
}

TEST(LedgerTest, EpsilonStrictlyIncreasesWithSteps) {
  for (double sigma : {0.5, 1.0, 2.3}) {
    const PrivacyLedger ledger({sigma, 1.0, 24.0 / 600.0, 1e-3, std::nullopt});
    double prev = ledger.EpsilonAfter(0);
    for (std::int64_t t : {1, 2, 5, 10, 50, 100, 500, 1000}) {
      const double eps = ledger.EpsilonAfter(t);
      EXPECT_GT(eps, prev) << "sigma=" << sigma << " t=" << t;
      prev = eps;
    }
  }
}

TEST(LedgerTest, RefusesToExceedTarget) {
  PrivacySpec spec{1.0, 1.0, 0.04, 1e-3, 2.0};
  PrivacyLedger ledger(spec);
  const std::int64_t cap = MaxSteps(spec, 2.0);
  for (std::int64_t i = 0; i < cap; ++i) ledger.RecordStep();
  EXPECT_LE(ledger.epsilon(), 2.0);
  EXPECT_FALSE(ledger.CanStep());
  EXPECT_THROW(ledger.RecordStep(), BudgetError);
  EXPECT_EQ(ledger.steps(), cap);
}

TEST(MaxStepsTest, Properties) {
  const PrivacySpec spec{1.0, 1.0, 0.04, 1e-3, std::nullopt};
  const PrivacyLedger ledger(spec);
  const double one = ledger.EpsilonAfter(1);
  EXPECT_GE(MaxSteps(spec, one), 1);
  EXPECT_THROW(MaxSteps(spec, one * 0.5), BudgetError);
  const std::int64_t t = MaxSteps(spec, 3.0);
  EXPECT_LE(ledger.EpsilonAfter(t), 3.0);
  EXPECT_GT(ledger.EpsilonAfter(t + 1), 3.0);
  PrivacySpec louder = spec;
  louder.noise_multiplier = 2.0;
  EXPECT_GE(MaxSteps(louder, 3.0), t);
}

TEST(PrivacySpecTest, Validation) {
  EXPECT_THROW(ValidatePrivacySpec({-1.0, 1.0, 0.5, 1e-5, std::nullopt}), InvalidArgument);
  EXPECT_THROW(ValidatePrivacySpec({1.0, 0.0, 0.5, 1e-5, std::nullopt}), InvalidArgument);
  EXPECT_THROW(ValidatePrivacySpec({1.0, INFINITY, 0.5, 1e-5, std::nullopt}), InvalidArgument);
  EXPECT_NO_THROW(ValidatePrivacySpec({0.0, INFINITY, 0.5, 1e-5, std::nullopt}));
  EXPECT_THROW(ValidatePrivacySpec({1.0, 1.0, 0.0, 1e-5, std::nullopt}), InvalidArgument);
  EXPECT_THROW(ValidatePrivacySpec({1.0, 1.0, 0.5, 1.0, std::nullopt}), InvalidArgument);
  EXPECT_THROW(ValidatePrivacySpec({1.0, 1.0, 0.5, 1e-5, 0.0}), InvalidArgument);
}

TEST(AuditTest, BoundedByAnalyticGaussian) {
  for (double sigma : {1.0, 2.0}) {
    const double analytic = AnalyticGaussianEpsilon(sigma, 1e-5);
    EXPECT_LE(EmpiricalAudit(sigma, 200000, 1e-5, 3), analytic + 0.2) << sigma;
  }
}

TEST(AuditTest, NonIncreasingInSigma) {
  const double a = EmpiricalAudit(0.5, 200000, 1e-5, 4);
  const double b = EmpiricalAudit(1.0, 200000, 1e-5, 4);
  const double c = EmpiricalAudit(4.0, 200000, 1e-5, 4);
  EXPECT_GE(a, b);
  EXPECT_GE(b, c);
  // Tail events hold as few as 50 samples, which leaves a Monte-Carlo floor
  // of roughly 0.2 even when the true privacy loss is zero.
  EXPECT_LT(EmpiricalAudit(1000.0, 1000000, 1e-5, 5), 0.25);
  EXPECT_THROW(EmpiricalAudit(1.0, 10, 1e-5), InvalidArgument);
}

TEST(AnalyticOracleTest, TighterThanRdpConversion) {
  const double eps = AnalyticGaussianEpsilon(1.0, 1e-5);
  EXPECT_GT(eps, 3.0);
  EXPECT_LT(eps, ToEpsDelta(StepCurve(1.0, 1.0), 1e-5).epsilon);
}

}  // namespace
}  // namespace dpgnn
