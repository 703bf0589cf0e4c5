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

#include "dpgnn/nn.hpp"

#include <random>
#include <vector>

#include "dpgnn/model.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace dpgnn {
namespace {

using testing::PermuteGraph;
using testing::RandomGraph;
using testing::RandomPermutation;

ModelConfig SmallConfig(ConvType conv, int classes, bool norms, Pooling pooling) {
  ModelConfig c;
  c.conv_type = conv;
  c.conv_widths = {6, 5};
  c.head_widths = {4};
  c.num_classes = classes;
  c.input_instance_norm = norms;
  c.conv_instance_norm = norms;
  c.pooling = pooling;
  return c;
}

std::vector<Graph> RandomGraphs(int count, int features, int classes, std::mt19937_64& rng) {
  std::vector<Graph> gs;
  for (int i = 0; i < count; ++i) {
    gs.push_back(RandomGraph(3 + i % 4, features, 0.5, i % classes, rng));
  }
  return gs;
}

class AllConvsTest : public ::testing::TestWithParam<ConvType> {};

TEST_P(AllConvsTest, WholeModelGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int classes : {2, 3}) {
    for (bool norms : {false, true}) {
      const Pooling pooling = norms ? Pooling::kMax : Pooling::kMean;
      const Model m0 = BuildModel(SmallConfig(GetParam(), classes, norms, pooling), 3, 9);
      const std::vector<Graph> gs = RandomGraphs(3, 3, classes, rng);
      const GraphBatch batch = BatchGraphs(std::span<const Graph>(gs));
      const Vector analytic = BatchMeanGradient(m0, batch);
      Model m = m0;
      const auto loss = [&] {
        ad::Tape t;
        return ad::ClassificationLoss(Forward(t, m, batch).logits, batch.labels).value()(0, 0);
      };
      std::size_t offset = 0;
      double worst = 0.0;
      for (auto& e : m.params.entries()) {
        for (Eigen::Index i = 0; i < e.value.size(); ++i) {
          double& x = e.value.data()[i];
          const double orig = x;
          x = orig + 1e-5;
          const double up = loss();
          x = orig - 1e-5;
          const double down = loss();
          x = orig;
          const double numeric = (up - down) / 2e-5;
          const double a = analytic(static_cast<Eigen::Index>(offset) + i);
          worst = std::max(worst, std::abs(a - numeric) /
                                      std::max(std::abs(a) + std::abs(numeric), 1e-6));
        }
        offset += static_cast<std::size_t>(e.value.size());
      }
      EXPECT_LT(worst, 1e-4) << "classes=" << classes << " norms=" << norms;
    }
  }
}

TEST_P(AllConvsTest, PerSampleRowsMatchBatchSizeOne) {
  std::mt19937_64 rng(2);
  const Model m = BuildModel(SmallConfig(GetParam(), 2, false, Pooling::kMean), 4, 3);
  const std::vector<Graph> gs = RandomGraphs(5, 4, 2, rng);
  const GraphBatch batch = BatchGraphs(std::span<const Graph>(gs));
  const PerSampleGrads rows = PerSampleGradients(m, batch);
  ASSERT_EQ(rows.rows(), 5);
  for (int k = 0; k < 5; ++k) {
    const Vector single = BatchMeanGradient(m, BatchGraph(gs[static_cast<std::size_t>(k)]));
    EXPECT_LT((rows.row(k).transpose() - single).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_P(AllConvsTest, MeanOfPerSampleRowsIsBatchGradient) {
  std::mt19937_64 rng(3);
  const Model m = BuildModel(SmallConfig(GetParam(), 3, true, Pooling::kMax), 4, 4);
  const std::vector<Graph> gs = RandomGraphs(6, 4, 3, rng);
  const GraphBatch batch = BatchGraphs(std::span<const Graph>(gs));
  const Vector mean = PerSampleGradients(m, batch).colwise().mean().transpose();
  EXPECT_LT((mean - BatchMeanGradient(m, batch)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_P(AllConvsTest, PermutingExamplesPermutesRows) {
  std::mt19937_64 rng(4);
  const Model m = BuildModel(SmallConfig(GetParam(), 2, false, Pooling::kMean), 3, 5);
  const std::vector<Graph> gs = RandomGraphs(4, 3, 2, rng);
  const std::vector<Graph> rev(gs.rbegin(), gs.rend());
  const PerSampleGrads a = PerSampleGradients(m, BatchGraphs(std::span<const Graph>(gs)));
  const PerSampleGrads b = PerSampleGradients(m, BatchGraphs(std::span<const Graph>(rev)));
  for (int k = 0; k < 4; ++k) EXPECT_EQ(a.row(k), b.row(3 - k));
}

TEST_P(AllConvsTest, LogitsInvariantToNodeRelabeling) {
  std::mt19937_64 rng(5);
  for (const Pooling pooling : {Pooling::kMean, Pooling::kMax}) {
    const Model m = BuildModel(SmallConfig(GetParam(), 3, true, pooling), 3, 6);
    for (int trial = 0; trial < 5; ++trial) {
      const Graph g = RandomGraph(7, 3, 0.4, 0, rng);
      const Graph p = PermuteGraph(g, RandomPermutation(7, rng));
      const Tensor a = ForwardModel(m, BatchGraph(g));
      const Tensor b = ForwardModel(m, BatchGraph(p));
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST_P(AllConvsTest, BatchingIsTransparent) {
  std::mt19937_64 rng(6);
  const Model m = BuildModel(SmallConfig(GetParam(), 2, true, Pooling::kMax), 3, 7);
  const std::vector<Graph> gs = RandomGraphs(5, 3, 2, rng);
  const Tensor batched = ForwardModel(m, BatchGraphs(std::span<const Graph>(gs)));
  for (int k = 0; k < 5; ++k) {
    const Tensor alone = ForwardModel(m, BatchGraph(gs[static_cast<std::size_t>(k)]));
    EXPECT_LT((batched.row(k) - alone.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Convs, AllConvsTest,
                         ::testing::Values(ConvType::kGcn, ConvType::kGat, ConvType::kSage),
                         [](const auto& info) { return std::string(ToString(info.param)); });

TEST(ModelTest, ZeroParametersGiveZeroLogits) {
  std::mt19937_64 rng(7);
  Model m = BuildModel(SmallConfig(ConvType::kGcn, 3, false, Pooling::kMean), 3, 1);
  for (auto& e : m.params.entries()) e.value.setZero();
  const std::vector<Graph> gs = RandomGraphs(3, 3, 3, rng);
  EXPECT_EQ(ForwardModel(m, BatchGraphs(std::span<const Graph>(gs))).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ModelTest, SameSeedIsBitwiseReproducible) {
  std::mt19937_64 rng(8);
  const Graph g = RandomGraph(6, 3, 0.5, 1, rng);
  const auto cfg = SmallConfig(ConvType::kGat, 2, true, Pooling::kMean);
  const Tensor a = ForwardModel(BuildModel(cfg, 3, 11), BatchGraph(g));
  const Tensor b = ForwardModel(BuildModel(cfg, 3, 11), BatchGraph(g));
  EXPECT_EQ(a, b);
}

TEST(ModelTest, BinaryHeadHasOneLogit) {
  std::mt19937_64 rng(9);
  const Graph g = RandomGraph(4, 2, 0.5, 0, rng);
  EXPECT_EQ(ForwardModel(BuildModel(SmallConfig(ConvType::kSage, 2, false, Pooling::kMean), 2, 0),
                         BatchGraph(g)).cols(), 1);
  EXPECT_EQ(ForwardModel(BuildModel(SmallConfig(ConvType::kSage, 4, false, Pooling::kMean), 2, 0),
                         BatchGraph(g)).cols(), 4);
}

TEST(ModelTest, RejectsInvalidConfigAndWidthMismatch) {
  ModelConfig c = SmallConfig(ConvType::kGcn, 2, false, Pooling::kMean);
  c.conv_widths.clear();
  EXPECT_THROW(BuildModel(c, 3, 0), InvalidArgument);
  const Model m = BuildModel(SmallConfig(ConvType::kGcn, 2, false, Pooling::kMean), 3, 0);
  std::mt19937_64 rng(10);
  EXPECT_THROW(ForwardModel(m, BatchGraph(RandomGraph(3, 2, 0.5, 0, rng))), InvalidArgument);
}

TEST(ModelTest, SyntheticPresetShapes) {
  const ModelConfig c = ModelPreset("synthetic", ConvType::kGcn);
  EXPECT_EQ(c.conv_widths, (std::vector<int>{200, 400, 800, 1600}));
  EXPECT_EQ(c.pooling, Pooling::kMean);
  const Model m = BuildModel(c, 9, 0);
  // Four GCN layers, one hidden dense layer of 256 and one output logit.
  const std::size_t expected = (9 * 200 + 200) + (200 * 400 + 400) + (400 * 800 + 800) +
                               (800 * 1600 + 1600) + (1600 * 256 + 256) + (256 + 1);
  EXPECT_EQ(m.params.size(), expected);
}

TEST(ModelTest, EcgPresetKeepsDropoutAndMaxPooling) {
  const ModelConfig c = ModelPreset("ecg", ConvType::kGcn);
  EXPECT_EQ(c.head_widths, (std::vector<int>{128, 56, 24}));
  EXPECT_EQ(c.pooling, Pooling::kMax);
  EXPECT_DOUBLE_EQ(c.dropout_rate, 0.2);
  EXPECT_THROW(ModelPreset("unknown", ConvType::kGcn), InvalidArgument);
}

TEST(SgdStepTest, Arithmetic) {
  ParameterSet p;
  p.Add("t", Tensor::Constant(1, 1, 1.0));
  const std::vector<double> g = {2.0};
  SgdStep(p, g, 0.5);
  EXPECT_DOUBLE_EQ(p.at("t")(0, 0), 0.0);
  SgdStep(p, g, 0.0);
  EXPECT_DOUBLE_EQ(p.at("t")(0, 0), 0.0);
  const std::vector<double> zero = {0.0};
  SgdStep(p, zero, 3.0);
  EXPECT_DOUBLE_EQ(p.at("t")(0, 0), 0.0);
}

TEST(ExtractGraphTest, RecoversBatchMembers) {
  std::mt19937_64 rng(11);
  const std::vector<Graph> gs = RandomGraphs(3, 2, 2, rng);
  const GraphBatch b = BatchGraphs(std::span<const Graph>(gs));
  for (int k = 0; k < 3; ++k) {
    const Graph g = ExtractGraph(b, k);
    EXPECT_EQ(g.features(), gs[static_cast<std::size_t>(k)].features());
    EXPECT_EQ(g.edges(), gs[static_cast<std::size_t>(k)].edges());
    EXPECT_EQ(g.label(), gs[static_cast<std::size_t>(k)].label());
  }
}

}  // namespace
}  // namespace dpgnn
