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

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "dpgnn/autodiff.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/model.hpp"
#include "dpgnn/tensor.hpp"

namespace dpgnn {

// batch_size x P matrix; row i is the gradient of example i's loss alone.
using PerSampleGrads = Tensor;

namespace internal {

inline void CheckFiniteGradient(std::span<const double> g) {
  for (double v : g) {
    if (!std::isfinite(v)) {
      throw DivergenceError("non-finite gradient encountered");
    }
  }
}

inline void CopyParamGrads(const ForwardResult& fwd, std::span<double> out) {
  std::size_t offset = 0;
  for (const ad::Var& p : fwd.params) {
    const Tensor& g = p.grad();
    const auto n = static_cast<std::size_t>(p.value().size());
    if (g.size() == 0) {
      std::fill_n(out.data() + offset, n, 0.0);
    } else {
      std::copy_n(g.data(), n, out.data() + offset);
    }
    offset += n;
  }
}

}  // namespace internal

// Gradient of the mean loss over the batch, flattened in parameter order.
// `training` enables dropout (non-private runs only).
inline Vector BatchMeanGradient(const Model& model, const GraphBatch& batch,
                                double* loss = nullptr, bool training = false,
                                std::mt19937_64* rng = nullptr) {
  ad::Tape tape;
  ForwardOptions opts;
  opts.param_grads = true;
  opts.training = training;
  opts.rng = rng;
  const ForwardResult fwd = Forward(tape, model, batch, opts);
  const ad::Var l = ad::ClassificationLoss(fwd.logits, batch.labels);
  tape.Backward(l);
  if (loss) *loss = l.value()(0, 0);
  Vector out(static_cast<Eigen::Index>(model.params.size()));
  internal::CopyParamGrads(fwd, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  internal::CheckFiniteGradient(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())));
  if (loss && !std::isfinite(*loss)) throw DivergenceError("non-finite loss");
  return out;
}

// Writes the gradient of one graph's loss into `out` (length P). Returns the
// loss value.
inline double ExampleGradient(const Model& model, const Graph& graph,
                              std::span<double> out) {
  internal::Require(out.size() == model.params.size(),
                    "gradient buffer has wrong length");
  const GraphBatch batch = BatchGraph(graph);
  ad::Tape tape;
  ForwardOptions opts;
  opts.param_grads = true;
  const ForwardResult fwd = Forward(tape, model, batch, opts);
  const ad::Var l = ad::ClassificationLoss(fwd.logits, batch.labels);
  tape.Backward(l);
  internal::CopyParamGrads(fwd, out);
  internal::CheckFiniteGradient(out);
  return l.value()(0, 0);
}

// Graph k of a batch as a standalone graph.
inline Graph ExtractGraph(const GraphBatch& batch, int k) {
  internal::Require(k >= 0 && k < batch.num_graphs(), "graph index out of range");
  const int a = batch.graph_offsets[static_cast<std::size_t>(k)];
  const int b = batch.graph_offsets[static_cast<std::size_t>(k) + 1];
  std::vector<Edge> edges;
  for (const Edge& e : batch.edges) {
    if (e.u >= a && e.u < b) edges.push_back({e.u - a, e.v - a});
  }
  return BuildGraph(batch.features.middleRows(a, b - a), std::move(edges),
                    batch.labels[static_cast<std::size_t>(k)]);
}

// One backward pass per example. Examples share nothing (no batch
// statistics, no dropout), so row i depends only on example i and the
// parameters.
inline PerSampleGrads PerSampleGradients(const Model& model,
                                         std::span<const Graph* const> graphs) {
  PerSampleGrads out(static_cast<Eigen::Index>(graphs.size()),
                     static_cast<Eigen::Index>(model.params.size()));
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ExampleGradient(model, *graphs[i],
                    std::span<double>(out.row(static_cast<Eigen::Index>(i)).data(),
                                      model.params.size()));
  }
  return out;
}

inline PerSampleGrads PerSampleGradients(const Model& model,
                                         const GraphBatch& batch) {
  std::vector<Graph> graphs;
  graphs.reserve(static_cast<std::size_t>(batch.num_graphs()));
  for (int k = 0; k < batch.num_graphs(); ++k) graphs.push_back(ExtractGraph(batch, k));
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return PerSampleGradients(model, std::span<const Graph* const>(ptrs));
}

// theta <- theta - lr * grad, in place.
inline void SgdStep(ParameterSet& params, std::span<const double> grad,
                    double lr) {
  internal::Require(grad.size() == params.size(),
                    "gradient length does not match parameter count");
  std::size_t offset = 0;
  for (auto& e : params.entries()) {
    Eigen::Map<Vector> theta(e.value.data(), e.value.size());
    theta -= lr * Eigen::Map<const Vector>(grad.data() + offset, e.value.size());
    offset += static_cast<std::size_t>(e.value.size());
  }
}

}  // namespace dpgnn
