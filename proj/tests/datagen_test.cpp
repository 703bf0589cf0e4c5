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

#include "dpgnn/datagen.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"

namespace dpgnn {
namespace {

TEST(ErdosRenyiTest, DefaultShape) {
  const Dataset d = GenErdosRenyiDataset({});
  ASSERT_EQ(d.graphs.size(), 1000u);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d.num_features, 9);
  int ones = 0;
  for (const Graph& g : d.graphs) {
    EXPECT_EQ(g.num_nodes(), 20);
    EXPECT_EQ(g.num_features(), 9);
    ones += g.label();
  }
  EXPECT_EQ(ones, 500);
  EXPECT_NO_THROW(ValidateDataset(d));
}

TEST(ErdosRenyiTest, FeatureMeansWithinStatisticalBounds) {
  const Dataset d = GenErdosRenyiDataset({});
  const double tol = 4.0 * 0.5 / std::sqrt(500.0 * 20.0);
  for (int c = 0; c < 9; ++c) {
    double sum[2] = {0.0, 0.0};
    for (const Graph& g : d.graphs) sum[g.label()] += g.features().col(c).sum();
    EXPECT_NEAR(sum[0] / (500.0 * 20.0), 0.0, tol) << "feature " << c;
    EXPECT_NEAR(sum[1] / (500.0 * 20.0), 0.1, tol) << "feature " << c;
  }
}

TEST(ErdosRenyiTest, EdgeCountsWithinBinomialBounds) {
  const Dataset d = GenErdosRenyiDataset({});
  double sum[2] = {0.0, 0.0};
  for (const Graph& g : d.graphs) sum[g.label()] += g.num_edges();
  // 500 graphs x 190 pairs per class.
  const double pairs = 500.0 * 190.0;
  for (int c = 0; c < 2; ++c) {
    const double p = c == 0 ? 0.2 : 0.3;
    EXPECT_NEAR(sum[c] / 500.0, 190.0 * p, 4.0 * std::sqrt(pairs * p * (1 - p)) / 500.0);
  }
}

TEST(ErdosRenyiTest, ZeroProbabilityGivesEdgelessGraphs) {
  SyntheticSpec s;
  s.num_graphs = 20;
  s.p0 = 0.0;
  s.p1 = 1.0;
  const Dataset d = GenErdosRenyiDataset(s);
  for (const Graph& g : d.graphs) {
    EXPECT_EQ(g.num_edges(), g.label() == 0 ? 0 : 190);
  }
}

TEST(ErdosRenyiTest, DeterministicPerSeed) {
  SyntheticSpec s;
  s.num_graphs = 10;
  s.seed = 9;
  const Dataset a = GenErdosRenyiDataset(s);
  const Dataset b = GenErdosRenyiDataset(s);
  s.seed = 10;
  const Dataset c = GenErdosRenyiDataset(s);
  for (std::size_t i = 0; i < a.graphs.size(); ++i) {
    EXPECT_EQ(a.graphs[i].features(), b.graphs[i].features());
    EXPECT_EQ(a.graphs[i].edges(), b.graphs[i].edges());
  }
  EXPECT_NE(a.graphs[0].features(), c.graphs[0].features());
}

TEST(ErdosRenyiTest, RejectsInvalidSpec) {
  SyntheticSpec s;
  s.num_graphs = 3;
  EXPECT_THROW(GenErdosRenyiDataset(s), InvalidArgument);
  s = {};
  s.p1 = 1.5;
  EXPECT_THROW(GenErdosRenyiDataset(s), InvalidArgument);
}

int Degree(const Graph& g, int node) {
  int d = 0;
  for (const Edge& e : g.edges()) d += e.u == node || e.v == node;
  return d;
}

TEST(EcgTest, StructureIsFixedByLayout) {
  const Graph a = BuildEcgGraph(Tensor::Random(12, 600), 1);
  const Graph b = BuildEcgGraph(Tensor::Zero(12, 512), 0);
  EXPECT_EQ(a.num_edges(), 34);
  EXPECT_EQ(a.edges(), b.edges());
  EXPECT_EQ(a.num_nodes(), 12);
  EXPECT_EQ(a.num_features(), 512);
  EXPECT_EQ(Degree(a, EcgLeadLayout::LeadIndex("V1")), 5);
  EXPECT_EQ(Degree(a, EcgLeadLayout::LeadIndex("I")), 7);
  EXPECT_EQ(Degree(a, EcgLeadLayout::LeadIndex("aVR")), 7);
  EXPECT_EQ(Degree(a, EcgLeadLayout::LeadIndex("V5")), 7);
  EXPECT_EQ(Degree(a, EcgLeadLayout::LeadIndex("II")), 5);
}

TEST(EcgTest, BridgeEdgesAreTheOnlyCrossEdges) {
  const Graph g = BuildEcgGraph(Tensor::Zero(12, 512), 0);
  std::set<Edge> cross;
  for (const Edge& e : g.edges()) {
    if ((e.u < 6) != (e.v < 6)) cross.insert(e);
  }
  const auto idx = [](const char* n) { return EcgLeadLayout::LeadIndex(n); };
  EXPECT_EQ(cross, (std::set<Edge>{MakeEdge(idx("I"), idx("V5")), MakeEdge(idx("I"), idx("V6")),
                                   MakeEdge(idx("aVR"), idx("V5")),
                                   MakeEdge(idx("aVR"), idx("V6"))}));
}

TEST(EcgTest, KeepsFirst512Samples) {
  const Tensor s = Tensor::Random(12, 700);
  EXPECT_EQ(BuildEcgGraph(s, 0).features(), s.leftCols(512));
  EXPECT_THROW(BuildEcgGraph(Tensor::Zero(12, 511), 0), InvalidArgument);
  EXPECT_THROW(BuildEcgGraph(Tensor::Zero(11, 512), 0), InvalidArgument);
  EXPECT_THROW(EcgLeadLayout::LeadIndex("V7"), InvalidArgument);
}

TEST(MotifTest, PlantedCliqueIsPresent) {
  const MotifDataset m = GenMotifDataset({});
  ASSERT_EQ(m.dataset.graphs.size(), 1000u);
  int ones = 0;
  for (std::size_t i = 0; i < m.dataset.graphs.size(); ++i) {
    const Graph& g = m.dataset.graphs[i];
    ones += g.label();
    const auto& motif = m.motif_edges[i];
    if (g.label() == 0) {
      EXPECT_TRUE(motif.empty());
      continue;
    }
    EXPECT_EQ(motif.size(), 10u);
    const std::set<Edge> edges(g.edges().begin(), g.edges().end());
    std::set<int> nodes;
    for (const Edge& e : motif) {
      EXPECT_TRUE(edges.count(e));
      nodes.insert(e.u);
      nodes.insert(e.v);
    }
    EXPECT_EQ(nodes.size(), 5u);
  }
  EXPECT_EQ(ones, 500);
}

TEST(MotifTest, FeatureIsNodeDegree) {
  const MotifDataset m = GenMotifDataset({.num_graphs = 4, .seed = 2});
  for (const Graph& g : m.dataset.graphs) {
    ASSERT_EQ(g.num_features(), 1);
    std::vector<double> degree(static_cast<std::size_t>(g.num_nodes()), 0.0);
    for (const Edge& e : g.edges()) {
      degree[static_cast<std::size_t>(e.u)] += 1.0;
      degree[static_cast<std::size_t>(e.v)] += 1.0;
    }
    for (int i = 0; i < g.num_nodes(); ++i) {
      EXPECT_EQ(g.features()(i, 0), degree[static_cast<std::size_t>(i)]);
    }
  }
}

TEST(MotifTest, ClassesAreDegreeMatched) {
  MotifSpec spec;
  spec.num_graphs = 2000;
  const MotifDataset m = GenMotifDataset(spec);
  double sum[2] = {0.0, 0.0};
  for (const Graph& g : m.dataset.graphs) sum[g.label()] += g.num_edges();
  EXPECT_NEAR(sum[0] / 1000.0, sum[1] / 1000.0, 1.0);
}

TEST(MotifTest, DeterministicPerSeed) {
  const MotifDataset a = GenMotifDataset({});
  const MotifDataset b = GenMotifDataset({});
  for (std::size_t i = 0; i < a.dataset.graphs.size(); ++i) {
    EXPECT_EQ(a.dataset.graphs[i].edges(), b.dataset.graphs[i].edges());
    EXPECT_EQ(a.motif_edges[i], b.motif_edges[i]);
  }
  MotifSpec bad;
  bad.base_nodes = 7;
  EXPECT_THROW(GenMotifDataset(bad), InvalidArgument);
}

}  // namespace
}  // namespace dpgnn
