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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpgnn/errors.hpp"
#include "dpgnn/tensor.hpp"

namespace dpgnn {

// Unordered node pair, stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge MakeEdge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// An undirected, unweighted graph with node features and a class label.
// Self-loops are never stored; layers add them when they need them.
class Graph {
 public:
  Graph() = default;

  int num_nodes() const { return static_cast<int>(features_.rows()); }
  int num_features() const { return static_cast<int>(features_.cols()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Tensor& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int label() const { return label_; }

 private:
  friend Graph BuildGraph(Tensor features, std::vector<Edge> edges, int label);

  Tensor features_;
  std::vector<Edge> edges_;
  int label_ = 0;
};

// Validates and normalizes the edge list. Throws InvalidArgument on an empty
// node set, an out-of-range endpoint, a self-loop or a repeated pair.
inline Graph BuildGraph(Tensor features, std::vector<Edge> edges, int label) {
  const auto n = features.rows();
  internal::Require(n >= 1, "graph must have at least one node");
  internal::Require(features.cols() >= 1, "graph must have at least one feature");
  internal::Require(label >= 0, "label must be a non-negative class index");
  internal::Require(features.allFinite(), "node features must be finite");
  std::set<Edge> seen;
  for (auto& e : edges) {
    internal::Require(e.u >= 0 && e.u < n && e.v >= 0 && e.v < n,
                      "edge endpoint out of range: (" + std::to_string(e.u) +
                          "," + std::to_string(e.v) + ")");
    internal::Require(e.u != e.v,
                      "self-loop on node " + std::to_string(e.u));
    e = MakeEdge(e.u, e.v);
    internal::Require(seen.insert(e).second,
                      "duplicate edge (" + std::to_string(e.u) + "," +
                          std::to_string(e.v) + ")");
  }
  Graph g;
  g.features_ = std::move(features);
  g.edges_ = std::move(edges);
  g.label_ = label;
  return g;
}

// Disjoint union of graphs. Graph k owns rows
// [graph_offsets[k], graph_offsets[k+1]) of the feature matrix.
struct GraphBatch {
  Tensor features;
  std::vector<Edge> edges;
  std::vector<int> node_to_graph;
  std::vector<int> graph_offsets;
  std::vector<int> labels;

  int num_graphs() const { return static_cast<int>(labels.size()); }
  int num_nodes() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
};

inline GraphBatch BatchGraphs(std::span<const Graph* const> graphs) {
  internal::Require(!graphs.empty(), "cannot batch an empty graph list");
  const int width = graphs.front()->num_features();
  int total_nodes = 0;
  std::size_t total_edges = 0;
  for (const Graph* g : graphs) {
    internal::Require(g->num_features() == width,
                      "feature width mismatch within batch");
    total_nodes += g->num_nodes();
    total_edges += g->edges().size();
  }
  GraphBatch batch;
  batch.features.resize(total_nodes, width);
  batch.edges.reserve(total_edges);
  batch.node_to_graph.reserve(static_cast<std::size_t>(total_nodes));
  batch.graph_offsets.reserve(graphs.size() + 1);
  batch.labels.reserve(graphs.size());
  int offset = 0;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    batch.graph_offsets.push_back(offset);
    batch.features.middleRows(offset, g.num_nodes()) = g.features();
    for (const Edge& e : g.edges()) {
      batch.edges.push_back({e.u + offset, e.v + offset});
    }
    batch.node_to_graph.insert(batch.node_to_graph.end(),
                               static_cast<std::size_t>(g.num_nodes()),
                               static_cast<int>(k));
    batch.labels.push_back(g.label());
    offset += g.num_nodes();
  }
  batch.graph_offsets.push_back(offset);
  return batch;
}

inline GraphBatch BatchGraphs(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return BatchGraphs(std::span<const Graph* const>(ptrs));
}

inline GraphBatch BatchGraph(const Graph& graph) {
  const Graph* ptr = &graph;
  return BatchGraphs(std::span<const Graph* const>(&ptr, 1));
}

struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 2;
  int num_features = 0;
  std::string name;
  std::string source;

  std::size_t size() const { return graphs.size(); }
};

// Checks the shared-width and label-range invariants.
inline void ValidateDataset(const Dataset& d) {
  internal::Require(!d.graphs.empty(), "dataset is empty");
  internal::Require(d.num_classes >= 2, "dataset needs at least two classes");
  for (const Graph& g : d.graphs) {
    internal::Require(g.num_features() == d.num_features,
                      "graph feature width differs from dataset width");
    internal::Require(g.label() < d.num_classes,
                      "graph label exceeds number of classes");
  }
}

inline double MeanNodeCount(const Dataset& d) {
  if (d.graphs.empty()) return 0.0;
  double total = 0.0;
  for (const Graph& g : d.graphs) total += g.num_nodes();
  return total / static_cast<double>(d.graphs.size());
}

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Uniformly shuffles [0, |D|) with the given seed and cuts it into
// train/validation/test blocks of the requested sizes.
inline Split SplitDataset(std::size_t dataset_size, SplitSizes sizes,
                          std::uint64_t seed) {
  internal::Require(sizes.train + sizes.validation + sizes.test == dataset_size,
                    "split sizes must sum to the dataset size");
  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Split split;
  auto it = order.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes.train));
  it += static_cast<std::ptrdiff_t>(sizes.train);
  split.validation.assign(it, it + static_cast<std::ptrdiff_t>(sizes.validation));
  it += static_cast<std::ptrdiff_t>(sizes.validation);
  split.test.assign(it, order.end());
  return split;
}

inline Split SplitDataset(const Dataset& d, SplitSizes sizes,
                          std::uint64_t seed) {
  return SplitDataset(d.size(), sizes, seed);
}

}  // namespace dpgnn
