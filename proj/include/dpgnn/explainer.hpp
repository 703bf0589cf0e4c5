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

// GNNExplainer-style soft edge masks for graph classifiers, thresholding,
// and edge-set IoU comparison of two models' explanations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "dpgnn/autodiff.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/losses.hpp"
#include "dpgnn/model.hpp"

namespace dpgnn {

// Importance in [0, 1] per undirected edge, aligned with Graph::edges().
using EdgeMask = std::vector<double>;

enum class MaskOptimizer { kAdam, kGradientDescent };

struct ExplainerConfig {
  int iterations = 100;
  double learning_rate = 0.1;
  double size_penalty = 0.005;
  double entropy_penalty = 1.0;
  double threshold = 0.2;
  MaskOptimizer optimizer = MaskOptimizer::kAdam;
  std::uint64_t seed = 0;
};

inline void ValidateExplainerConfig(const ExplainerConfig& c) {
  internal::Require(c.iterations >= 0, "iterations must be >= 0");
  internal::Require(c.learning_rate > 0.0, "learning_rate must be > 0");
  internal::Require(c.size_penalty >= 0.0 && c.entropy_penalty >= 0.0,
                    "penalties must be >= 0");
  internal::Require(c.threshold > 0.0 && c.threshold < 1.0,
                    "threshold must lie in (0, 1)");
}

struct Explanation {
  EdgeMask mask;
  // Class the model predicts on the unmasked graph; the mask is fitted to
  // preserve it.
  int target_class = 0;
  // Objective before each update, then once more for the final mask.
  std::vector<double> objective;
};

struct MaskObjective {
  double value = 0.0;
  // d objective / d mask.
  std::vector<double> grad;
};

// Cross entropy against `target_class` with every edge message scaled by
// its mask entry, plus size_penalty * sum(m) + entropy_penalty * mean(H(m)).
inline MaskObjective EvaluateMaskObjective(const Model& model, const GraphBatch& batch,
                                           std::span<const double> mask,
                                           int target_class,
                                           const ExplainerConfig& cfg) {
  const auto e = static_cast<Eigen::Index>(mask.size());
  ad::Tape tape;
  Tensor m(e, 1);
  std::copy(mask.begin(), mask.end(), m.data());
  const ad::Var mask_var = tape.Leaf(std::move(m), true);
  ForwardOptions opts;
  opts.edge_mask = mask_var;
  const ForwardResult fwd = Forward(tape, model, batch, opts);
  const int label = target_class;
  const ad::Var loss = ad::ClassificationLoss(fwd.logits, std::span<const int>(&label, 1));
  tape.Backward(loss);

  MaskObjective out;
  out.value = loss.value()(0, 0);
  out.grad.assign(mask.size(), 0.0);
  const Tensor& g = mask_var.grad();
  const double inv_e = 1.0 / static_cast<double>(e);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const double mk = mask[k];
    const double entropy = -mk * std::log(mk) - (1.0 - mk) * std::log1p(-mk);
    out.value += cfg.size_penalty * mk + cfg.entropy_penalty * entropy * inv_e;
    const double d_entropy = std::log1p(-mk) - std::log(mk);
    out.grad[k] = (g.size() ? g(static_cast<Eigen::Index>(k), 0) : 0.0) +
                  cfg.size_penalty + cfg.entropy_penalty * d_entropy * inv_e;
  }
  return out;
}

// Fits sigmoid(logits) as a soft edge mask. Logits start at Normal(0, 0.1).
inline Explanation ExplainGraph(const Model& model, const Graph& graph,
                                const ExplainerConfig& cfg) {
  ValidateExplainerConfig(cfg);
  internal::Require(graph.num_edges() > 0, "cannot explain an edgeless graph");
  internal::Require(graph.num_features() == model.num_features,
                    "graph feature width does not match the model");
  const GraphBatch batch = BatchGraph(graph);
  Explanation out;
  out.target_class = PredictedClasses(ForwardModel(model, batch)).front();

  const auto e = static_cast<std::size_t>(graph.num_edges());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.1);
  std::vector<double> logits(e), mask(e), first(e, 0.0), second(e, 0.0);
  for (double& z : logits) z = init(rng);
  const auto refresh = [&] {
    for (std::size_t k = 0; k < e; ++k) mask[k] = Sigmoid(logits[k]);
  };
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  refresh();
  for (int it = 0; it < cfg.iterations; ++it) {
    const MaskObjective obj =
        EvaluateMaskObjective(model, batch, mask, out.target_class, cfg);
    out.objective.push_back(obj.value);
    const double c1 = 1.0 - std::pow(kBeta1, it + 1);
    const double c2 = 1.0 - std::pow(kBeta2, it + 1);
    for (std::size_t k = 0; k < e; ++k) {
      const double gz = obj.grad[k] * mask[k] * (1.0 - mask[k]);
      if (cfg.optimizer == MaskOptimizer::kGradientDescent) {
        logits[k] -= cfg.learning_rate * gz;
        continue;
      }
      first[k] = kBeta1 * first[k] + (1.0 - kBeta1) * gz;
      second[k] = kBeta2 * second[k] + (1.0 - kBeta2) * gz * gz;
      logits[k] -= cfg.learning_rate * (first[k] / c1) /
                   (std::sqrt(second[k] / c2) + kAdamEps);
    }
    refresh();
  }
  out.objective.push_back(
      EvaluateMaskObjective(model, batch, mask, out.target_class, cfg).value);
  out.mask = std::move(mask);
  return out;
}

// Edges whose mask value exceeds t.
inline std::vector<Edge> ThresholdMask(std::span<const double> mask,
                                       std::span<const Edge> edges, double t) {
  internal::Require(mask.size() == edges.size(), "mask and edge list lengths differ");
  internal::Require(t > 0.0 && t < 1.0, "threshold must lie in (0, 1)");
  std::vector<Edge> kept;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] > t) kept.push_back(edges[k]);
  }
  return kept;
}

// |A n B| / |A u B| over unordered pairs; 1 when both are empty.
inline double EdgeIou(std::span<const Edge> a, std::span<const Edge> b) {
  std::set<Edge> sa, sb;
  for (const Edge& e : a) sa.insert(MakeEdge(e.u, e.v));
  for (const Edge& e : b) sb.insert(MakeEdge(e.u, e.v));
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const Edge& e : sa) inter += sb.count(e);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct IouRecord {
  std::size_t graph_index = 0;
  EdgeMask mask_a;
  EdgeMask mask_b;
  std::vector<Edge> edges_a;
  std::vector<Edge> edges_b;
  double iou_original_a = 0.0;
  double iou_original_b = 0.0;
  double iou_a_b = 0.0;
};

struct IouReport {
  std::vector<IouRecord> records;
  double mean_original_a = 0.0;
  double mean_original_b = 0.0;
  double mean_a_b = 0.0;
};

// Explains every graph with both models (same seed) and reports the three
// pairwise IoUs between the original edge set and the two thresholded
// explanations. Edgeless graphs are skipped.
inline IouReport CompareModels(const Model& model_a, const Model& model_b,
                               std::span<const Graph> graphs,
                               const ExplainerConfig& cfg,
                               std::span<const std::size_t> indices = {}) {
  IouReport report;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    if (g.num_edges() == 0) continue;
    IouRecord r;
    r.graph_index = indices.empty() ? i : indices[i];
    r.mask_a = ExplainGraph(model_a, g, cfg).mask;
    r.mask_b = ExplainGraph(model_b, g, cfg).mask;
    r.edges_a = ThresholdMask(r.mask_a, g.edges(), cfg.threshold);
    r.edges_b = ThresholdMask(r.mask_b, g.edges(), cfg.threshold);
    r.iou_original_a = EdgeIou(g.edges(), r.edges_a);
    r.iou_original_b = EdgeIou(g.edges(), r.edges_b);
    r.iou_a_b = EdgeIou(r.edges_a, r.edges_b);
    report.records.push_back(std::move(r));
  }
  if (!report.records.empty()) {
    const double n = static_cast<double>(report.records.size());
    for (const IouRecord& r : report.records) {
      report.mean_original_a += r.iou_original_a / n;
      report.mean_original_b += r.iou_original_b / n;
      report.mean_a_b += r.iou_a_b / n;
    }
  }
  return report;
}

}  // namespace dpgnn
