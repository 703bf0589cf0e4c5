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
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dpgnn/autodiff.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/graph_ops.hpp"
#include "dpgnn/tensor.hpp"

namespace dpgnn {

enum class ConvType { kGcn, kGat, kSage };

inline std::string_view ToString(ConvType t) {
  switch (t) {
    case ConvType::kGcn: return "gcn";
    case ConvType::kGat: return "gat";
    case ConvType::kSage: return "sage";
  }
  return "?";
}

inline ConvType ParseConvType(std::string_view s) {
  if (s == "gcn") return ConvType::kGcn;
  if (s == "gat") return ConvType::kGat;
  if (s == "sage") return ConvType::kSage;
  throw InvalidArgument("unknown conv type: " + std::string(s));
}

inline std::string_view ToString(Pooling p) {
  return p == Pooling::kMean ? "mean" : "max";
}

inline Pooling ParsePooling(std::string_view s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "max") return Pooling::kMax;
  throw InvalidArgument("unknown pooling: " + std::string(s));
}

struct ModelConfig {
  ConvType conv_type = ConvType::kGcn;
  std::vector<int> conv_widths;
  std::vector<int> head_widths;
  // Instance norm on the raw node features.
  bool input_instance_norm = false;
  // Instance norm between each convolution and its ReLU.
  bool conv_instance_norm = false;
  double dropout_rate = 0.0;
  Pooling pooling = Pooling::kMean;
  int num_classes = 2;

  // Binary tasks use a single logit.
  int output_width() const { return num_classes == 2 ? 1 : num_classes; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline void ValidateModelConfig(const ModelConfig& cfg) {
  internal::Require(!cfg.conv_widths.empty(), "conv_widths must be non-empty");
  for (int w : cfg.conv_widths) {
    internal::Require(w > 0, "conv widths must be positive");
  }
  for (int w : cfg.head_widths) {
    internal::Require(w > 0, "head widths must be positive");
  }
  internal::Require(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0,
                    "dropout_rate must lie in [0, 1)");
  internal::Require(cfg.num_classes >= 2, "num_classes must be >= 2");
}

struct Model {
  ModelConfig config;
  int num_features = 0;
  ParameterSet params;
};

// Architectures used for the four benchmark datasets.
inline ModelConfig ModelPreset(std::string_view dataset, ConvType conv) {
  ModelConfig cfg;
  cfg.conv_type = conv;
  if (dataset == "synthetic") {
    cfg.conv_widths = {200, 400, 800, 1600};
    cfg.head_widths = {256};
    cfg.pooling = Pooling::kMean;
  } else if (dataset == "scalability") {
    // Three-layer variant used for the graph-size sweep.
    cfg.conv_widths = {200, 400, 800};
    cfg.head_widths = {256};
    cfg.pooling = Pooling::kMean;
  } else if (dataset == "fingerprint") {
    cfg.input_instance_norm = true;
    cfg.conv_widths = {256, 512, 1024};
    cfg.head_widths = {256};
    cfg.pooling = Pooling::kMax;
    cfg.num_classes = 4;
  } else if (dataset == "ecg") {
    cfg.conv_widths = {256, 512};
    cfg.head_widths = {128, 56, 24};
    cfg.pooling = Pooling::kMax;
    cfg.dropout_rate = 0.2;
  } else if (dataset == "molbace") {
    cfg.input_instance_norm = true;
    cfg.conv_instance_norm = true;
    cfg.conv_widths = {256, 512, 1024};
    cfg.head_widths = {512};
    cfg.pooling = Pooling::kMean;
  } else {
    throw InvalidArgument("unknown model preset: " + std::string(dataset));
  }
  return cfg;
}

namespace internal {

inline Tensor UniformInit(Eigen::Index rows, Eigen::Index cols, int fan_in,
                          std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

inline Tensor GlorotInit(Eigen::Index rows, Eigen::Index cols,
                         std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

}  // namespace internal

// Assembles the parameter set for `cfg`. GCN and GAT weights and attention
// vectors are Glorot-uniform with zero GCN bias; SAGE and dense layers draw
// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)). Instance norm starts at gamma=1,
// beta=0.
inline Model BuildModel(const ModelConfig& cfg, int num_features,
                        std::uint64_t seed) {
  ValidateModelConfig(cfg);
  internal::Require(num_features > 0, "num_features must be positive");
  std::mt19937_64 rng(seed);
  Model m;
  m.config = cfg;
  m.num_features = num_features;
  auto norm = [&](const std::string& prefix, int width) {
    m.params.Add(prefix + ".gamma", Tensor::Ones(1, width));
    m.params.Add(prefix + ".beta", Tensor::Zero(1, width));
  };
  if (cfg.input_instance_norm) norm("input_norm", num_features);
  int in = num_features;
  for (std::size_t k = 0; k < cfg.conv_widths.size(); ++k) {
    const int out = cfg.conv_widths[k];
    const std::string p = "conv" + std::to_string(k);
    switch (cfg.conv_type) {
      case ConvType::kGcn:
        m.params.Add(p + ".weight", internal::GlorotInit(in, out, rng));
        m.params.Add(p + ".bias", Tensor::Zero(1, out));
        break;
      case ConvType::kGat:
        m.params.Add(p + ".weight", internal::GlorotInit(in, out, rng));
        m.params.Add(p + ".att_dst", internal::GlorotInit(out, 1, rng));
        m.params.Add(p + ".att_src", internal::GlorotInit(out, 1, rng));
        break;
      case ConvType::kSage:
        m.params.Add(p + ".weight_self", internal::UniformInit(in, out, in, rng));
        m.params.Add(p + ".weight_neigh", internal::UniformInit(in, out, in, rng));
        m.params.Add(p + ".bias", internal::UniformInit(1, out, in, rng));
        break;
    }
    if (cfg.conv_instance_norm) norm(p + ".norm", out);
    in = out;
  }
  for (std::size_t k = 0; k < cfg.head_widths.size(); ++k) {
    const int out = cfg.head_widths[k];
    const std::string p = "head" + std::to_string(k);
    m.params.Add(p + ".weight", internal::UniformInit(in, out, in, rng));
    m.params.Add(p + ".bias", internal::UniformInit(1, out, in, rng));
    in = out;
  }
  m.params.Add("out.weight",
               internal::UniformInit(in, cfg.output_width(), in, rng));
  m.params.Add("out.bias", internal::UniformInit(1, cfg.output_width(), in, rng));
  return m;
}

// ---------------------------------------------------------------------------
// Convolutions on the tape
// ---------------------------------------------------------------------------

namespace ad {

// D^-1/2 (A+I) D^-1/2 X W + b.
inline Var GcnConv(Var x, const std::shared_ptr<const Topology>& topo,
                   Var weight, Var bias,
                   std::optional<Var> mask = std::nullopt) {
  return AddRowVector(Propagate(MatMul(x, weight), topo, Coefficients::kGcn, mask),
                      bias);
}

// Single-head attention; no bias term.
inline Var GatConv(Var x, const std::shared_ptr<const Topology>& topo,
                   Var weight, Var att_dst, Var att_src,
                   std::optional<Var> mask = std::nullopt) {
  return GatAggregate(MatMul(x, weight), att_dst, att_src, topo, mask);
}

// W_self x_i + W_neigh mean_{j in N(i)} x_j + b; isolated nodes aggregate 0.
inline Var SageConv(Var x, const std::shared_ptr<const Topology>& topo,
                    Var weight_self, Var weight_neigh, Var bias,
                    std::optional<Var> mask = std::nullopt) {
  const Var neigh = Propagate(x, topo, Coefficients::kMean, mask);
  return AddRowVector(Add(MatMul(x, weight_self), MatMul(neigh, weight_neigh)),
                      bias);
}

}  // namespace ad

struct ForwardOptions {
  // Record parameters as differentiable leaves.
  bool param_grads = false;
  // Enables dropout; requires `rng`.
  bool training = false;
  std::mt19937_64* rng = nullptr;
  // Column of per-edge weights aligned with batch.edges.
  std::optional<ad::Var> edge_mask;
};

struct ForwardResult {
  ad::Var logits;
  // Parameter leaves in ParameterSet order.
  std::vector<ad::Var> params;
};

inline ForwardResult Forward(ad::Tape& tape, const Model& model,
                             const GraphBatch& batch,
                             const ForwardOptions& opts = {}) {
  const ModelConfig& cfg = model.config;
  internal::Require(batch.num_features() == model.num_features,
                    "batch feature width " + std::to_string(batch.num_features()) +
                        " does not match model width " +
                        std::to_string(model.num_features));
  const bool dropout = opts.training && cfg.dropout_rate > 0.0;
  internal::Require(!dropout || opts.rng != nullptr,
                    "dropout in training mode needs an rng");

  ForwardResult result;
  result.params.reserve(model.params.num_tensors());
  for (const auto& e : model.params.entries()) {
    result.params.push_back(tape.View(e.value, opts.param_grads));
  }
  std::size_t next = 0;
  auto take = [&]() { return result.params[next++]; };

  auto topo = std::make_shared<const Topology>(BuildTopology(batch));
  const std::span<const int> offsets(batch.graph_offsets);
  ad::Var h = tape.View(batch.features, false);
  if (cfg.input_instance_norm) {
    const ad::Var gamma = take();
    const ad::Var beta = take();
    h = ad::InstanceNorm(h, offsets, gamma, beta);
  }
  for (std::size_t k = 0; k < cfg.conv_widths.size(); ++k) {
    switch (cfg.conv_type) {
      case ConvType::kGcn: {
        const ad::Var w = take();
        const ad::Var b = take();
        h = ad::GcnConv(h, topo, w, b, opts.edge_mask);
        break;
      }
      case ConvType::kGat: {
        const ad::Var w = take();
        const ad::Var a_dst = take();
        const ad::Var a_src = take();
        h = ad::GatConv(h, topo, w, a_dst, a_src, opts.edge_mask);
        break;
      }
      case ConvType::kSage: {
        const ad::Var ws = take();
        const ad::Var wn = take();
        const ad::Var b = take();
        h = ad::SageConv(h, topo, ws, wn, b, opts.edge_mask);
        break;
      }
    }
    if (cfg.conv_instance_norm) {
      const ad::Var gamma = take();
      const ad::Var beta = take();
      h = ad::InstanceNorm(h, offsets, gamma, beta);
    }
    h = ad::Relu(h);
    if (dropout) h = ad::Dropout(h, cfg.dropout_rate, *opts.rng);
  }
  h = ad::SegmentPool(h, offsets, cfg.pooling);
  if (dropout) h = ad::Dropout(h, cfg.dropout_rate, *opts.rng);
  for (std::size_t k = 0; k < cfg.head_widths.size(); ++k) {
    const ad::Var w = take();
    const ad::Var b = take();
    h = ad::Relu(ad::AddRowVector(ad::MatMul(h, w), b));
  }
  const ad::Var w = take();
  const ad::Var b = take();
  result.logits = ad::AddRowVector(ad::MatMul(h, w), b);
  return result;
}

// Per-graph logits in evaluation mode.
inline Tensor ForwardModel(const Model& model, const GraphBatch& batch) {
  ad::Tape tape;
  return Forward(tape, model, batch).logits.value();
}

// Class probabilities per graph: sigmoid for a single logit (returned as two
// columns [1-p, p]), softmax otherwise.
inline Tensor ClassProbabilities(const Tensor& logits) {
  if (logits.cols() == 1) {
    Tensor p(logits.rows(), 2);
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      p(i, 1) = Sigmoid(logits(i, 0));
      p(i, 0) = 1.0 - p(i, 1);
    }
    return p;
  }
  Tensor p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

inline std::vector<int> PredictedClasses(const Tensor& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (logits.cols() == 1) {
      out[static_cast<std::size_t>(i)] = logits(i, 0) > 0.0 ? 1 : 0;
    } else {
      Eigen::Index best = 0;
      logits.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
  }
  return out;
}

}  // namespace dpgnn
