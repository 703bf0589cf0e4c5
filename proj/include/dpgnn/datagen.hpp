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

#pragma once

// Dataset generators: the two-class Erdos-Renyi benchmark, the 12-lead ECG
// graph layout, and a planted-clique dataset with known ground-truth edges.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpgnn/graph.hpp"

namespace dpgnn {

struct SyntheticSpec {
  int num_graphs = 1000;
  int nodes_per_graph = 20;
  int num_features = 9;
  double class0_mean = 0.0;
  double class1_mean = 0.1;
  double feature_std = 0.5;
  double p0 = 0.2;
  double p1 = 0.3;
  std::uint64_t seed = 0;
};

inline void ValidateSyntheticSpec(const SyntheticSpec& s) {
  internal::Require(s.num_graphs > 0 && s.num_graphs % 2 == 0,
                    "num_graphs must be positive and even (balanced classes)");
  internal::Require(s.nodes_per_graph >= 1, "nodes_per_graph must be >= 1");
  internal::Require(s.num_features >= 1, "num_features must be >= 1");
  internal::Require(s.feature_std >= 0.0, "feature_std must be >= 0");
  internal::Require(s.p0 >= 0.0 && s.p0 <= 1.0 && s.p1 >= 0.0 && s.p1 <= 1.0,
                    "edge probabilities must lie in [0, 1]");
}

namespace internal {

// G(n, p) edge list in lexicographic pair order.
template <typename Rng>
std::vector<Edge> ErdosRenyiEdges(int n, double p, Rng& rng) {
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(p);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.push_back({u, v});
    }
  }
  return edges;
}

}  // namespace internal

// Graphs [0, n/2) are class 0 and [n/2, n) class 1. Node features are i.i.d.
// Normal(class mean, feature_std) per entry, the same mean on every feature.
// Isolated nodes are kept.
inline Dataset GenErdosRenyiDataset(const SyntheticSpec& spec) {
  ValidateSyntheticSpec(spec);
  std::mt19937_64 rng(spec.seed);
  Dataset d;
  d.num_classes = 2;
  d.num_features = spec.num_features;
  d.name = "synthetic";
  d.source = "erdos-renyi seed=" + std::to_string(spec.seed);
  d.graphs.reserve(static_cast<std::size_t>(spec.num_graphs));
  for (int i = 0; i < spec.num_graphs; ++i) {
    const int label = i < spec.num_graphs / 2 ? 0 : 1;
    const double mean = label == 0 ? spec.class0_mean : spec.class1_mean;
    std::normal_distribution<double> feature(mean, spec.feature_std);
    Tensor x(spec.nodes_per_graph, spec.num_features);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = feature(rng);
    auto edges = internal::ErdosRenyiEdges(spec.nodes_per_graph,
                                           label == 0 ? spec.p0 : spec.p1, rng);
    d.graphs.push_back(BuildGraph(std::move(x), std::move(edges), label));
  }
  return d;
}

// Standard 12-lead order; node index = position in this list.
inline constexpr std::array<const char*, 12> kEcgLeads = {
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"};

struct EcgLeadLayout {
  static constexpr int kNumLeads = 12;
  static constexpr int kSamplesPerLead = 512;
  // Limb leads: I, II, III, aVR, aVL, aVF.
  static constexpr std::array<int, 6> kExtremity = {0, 1, 2, 3, 4, 5};
  // Chest leads: V1..V6.
  static constexpr std::array<int, 6> kChest = {6, 7, 8, 9, 10, 11};
  // I, aVR, V5, V6.
  static constexpr std::array<int, 4> kBridge = {0, 3, 10, 11};

  static int LeadIndex(const std::string& name) {
    for (int i = 0; i < kNumLeads; ++i) {
      if (name == kEcgLeads[static_cast<std::size_t>(i)]) return i;
    }
    throw InvalidArgument("unknown ECG lead: " + name);
  }

  // Extremity clique, chest clique and the bridge clique, deduplicated.
  static std::vector<Edge> Edges() {
    std::set<Edge> all;
    auto clique = [&](auto nodes) {
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
          all.insert(MakeEdge(nodes[a], nodes[b]));
        }
      }
    };
    clique(kExtremity);
    clique(kChest);
    clique(kBridge);
    return {all.begin(), all.end()};
  }
};

// `signals` holds one lead per row (12 x T). Node features are the first 512
// samples of each lead; the edge set is fixed by the layout.
inline Graph BuildEcgGraph(const Tensor& signals, int label) {
  internal::Require(signals.rows() == EcgLeadLayout::kNumLeads,
                    "ECG input needs exactly 12 leads, got " +
                        std::to_string(signals.rows()));
  internal::Require(signals.cols() >= EcgLeadLayout::kSamplesPerLead,
                    "ECG leads need at least 512 samples, got " +
                        std::to_string(signals.cols()));
  return BuildGraph(signals.leftCols(EcgLeadLayout::kSamplesPerLead),
                    EcgLeadLayout::Edges(), label);
}

struct MotifDataset {
  Dataset dataset;
  // Planted clique edges per graph; empty for class-0 graphs.
  std::vector<std::vector<Edge>> motif_edges;
};

struct MotifSpec {
  int num_graphs = 1000;
  int base_nodes = 20;
  double background_p = 0.1;
  int motif_size = 5;
  std::uint64_t seed = 0;
};

// Both classes start from a G(n, p) background. Class 1 plants a clique on
// motif_size random nodes; class 0 adds the same number of uniformly random
// node pairs instead, so edge counts match in expectation. The single node
// feature is the degree.
inline MotifDataset GenMotifDataset(const MotifSpec& spec) {
  internal::Require(spec.num_graphs > 0 && spec.num_graphs % 2 == 0,
                    "num_graphs must be positive and even");
  internal::Require(spec.base_nodes >= 8, "base_nodes must be >= 8");
  internal::Require(spec.motif_size >= 3 && spec.motif_size <= spec.base_nodes,
                    "motif size must lie in [3, base_nodes]");
  internal::Require(spec.background_p >= 0.0 && spec.background_p <= 1.0,
                    "background_p must lie in [0, 1]");
  const int n = spec.base_nodes;
  const int motif_pairs = spec.motif_size * (spec.motif_size - 1) / 2;

  std::mt19937_64 rng(spec.seed);
  MotifDataset out;
  Dataset& d = out.dataset;
  d.num_classes = 2;
  d.num_features = 1;
  d.name = "motif";
  d.source = "planted-clique seed=" + std::to_string(spec.seed);
  for (int i = 0; i < spec.num_graphs; ++i) {
    const int label = i % 2;
    std::vector<Edge> motif;
    std::vector<Edge> edges = internal::ErdosRenyiEdges(n, spec.background_p, rng);
    std::set<Edge> present(edges.begin(), edges.end());
    if (label == 0) {
      std::uniform_int_distribution<int> node(0, n - 1);
      for (int k = 0; k < motif_pairs; ++k) {
        int u = node(rng);
        int v = node(rng);
        while (v == u) v = node(rng);
        const Edge e = MakeEdge(u, v);
        if (present.insert(e).second) edges.push_back(e);
      }
    } else {
      std::vector<int> nodes(static_cast<std::size_t>(n));
      std::iota(nodes.begin(), nodes.end(), 0);
      std::shuffle(nodes.begin(), nodes.end(), rng);
      nodes.resize(static_cast<std::size_t>(spec.motif_size));
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
          const Edge e = MakeEdge(nodes[a], nodes[b]);
          motif.push_back(e);
          if (present.insert(e).second) edges.push_back(e);
        }
      }
      std::sort(motif.begin(), motif.end());
    }
    Tensor degree = Tensor::Zero(n, 1);
    for (const Edge& e : edges) {
      degree(e.u, 0) += 1.0;
      degree(e.v, 0) += 1.0;
    }
    d.graphs.push_back(BuildGraph(std::move(degree), std::move(edges), label));
    out.motif_edges.push_back(std::move(motif));
  }
  return out;
}

}  // namespace dpgnn
