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

// Differentiable graph primitives: sparse neighbourhood aggregation, single
// head attention, per-graph instance normalisation and readout, and the two
// classification losses. All of them work on a disjoint-union batch.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dpgnn/autodiff.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/losses.hpp"

namespace dpgnn {

// Directed message structure of a batch, grouped by destination node. Each
// node's row starts with its self-loop (edge_id -1) followed by one entry per
// incident undirected edge. Both directions of an undirected edge share its
// edge_id, which is how an edge mask addresses them.
struct Topology {
  int num_nodes = 0;
  int num_edges = 0;
  std::vector<int> degree;
  std::vector<int> row_ptr;
  std::vector<int> src;
  std::vector<int> edge_id;
  // D^-1/2 (A+I) D^-1/2 weights, D taken from A+I.
  std::vector<double> gcn_coef;
  // 1/deg(dst) on neighbour entries, 0 on the self-loop.
  std::vector<double> mean_coef;
};

inline Topology BuildTopology(int num_nodes, std::span<const Edge> edges) {
  Topology t;
  t.num_nodes = num_nodes;
  t.num_edges = static_cast<int>(edges.size());
  t.degree.assign(static_cast<std::size_t>(num_nodes), 0);
  for (const Edge& e : edges) {
    ++t.degree[static_cast<std::size_t>(e.u)];
    ++t.degree[static_cast<std::size_t>(e.v)];
  }
  t.row_ptr.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (int i = 0; i < num_nodes; ++i) {
    t.row_ptr[static_cast<std::size_t>(i) + 1] =
        t.row_ptr[static_cast<std::size_t>(i)] + 1 +
        t.degree[static_cast<std::size_t>(i)];
  }
  const auto total = static_cast<std::size_t>(t.row_ptr.back());
  t.src.assign(total, 0);
  t.edge_id.assign(total, -1);
  std::vector<int> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < num_nodes; ++i) {
    const auto p = static_cast<std::size_t>(fill[static_cast<std::size_t>(i)]++);
    t.src[p] = i;
  }
  for (int k = 0; k < t.num_edges; ++k) {
    const Edge& e = edges[static_cast<std::size_t>(k)];
    auto p = static_cast<std::size_t>(fill[static_cast<std::size_t>(e.u)]++);
    t.src[p] = e.v;
    t.edge_id[p] = k;
    p = static_cast<std::size_t>(fill[static_cast<std::size_t>(e.v)]++);
    t.src[p] = e.u;
    t.edge_id[p] = k;
  }
  t.gcn_coef.resize(total);
  t.mean_coef.resize(total);
  for (int i = 0; i < num_nodes; ++i) {
    const double di = t.degree[static_cast<std::size_t>(i)] + 1.0;
    for (int p = t.row_ptr[static_cast<std::size_t>(i)];
         p < t.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      const double dj = t.degree[static_cast<std::size_t>(t.src[pp])] + 1.0;
      t.gcn_coef[pp] = 1.0 / std::sqrt(di * dj);
      t.mean_coef[pp] =
          t.edge_id[pp] < 0 ? 0.0 : 1.0 / (di - 1.0);
    }
  }
  return t;
}

inline Topology BuildTopology(const GraphBatch& batch) {
  return BuildTopology(batch.num_nodes(), batch.edges);
}

enum class Pooling { kMean, kMax };

namespace ad {

namespace internal_ops {

inline double MaskValue(const std::optional<Var>& mask, int edge_id) {
  if (!mask || edge_id < 0) return 1.0;
  return mask->value()(edge_id, 0);
}

inline void CheckMask(const std::optional<Var>& mask, const Topology& topo) {
  if (!mask) return;
  internal::Require(mask->rows() == topo.num_edges && mask->cols() == 1,
                    "edge mask must be a column with one entry per edge");
}

}  // namespace internal_ops

// out[i] = sum_p coef[p] * mask[edge_id[p]] * x[src[p]] over row i of the
// topology. Self-loop entries are never masked.
enum class Coefficients { kGcn, kMean };

inline Var Propagate(Var x, std::shared_ptr<const Topology> topology,
                     Coefficients which,
                     std::optional<Var> mask = std::nullopt) {
  const Topology& topo = *topology;
  const std::vector<double>& coef =
      which == Coefficients::kGcn ? topo.gcn_coef : topo.mean_coef;
  internal::Require(x.rows() == topo.num_nodes, "Propagate node count mismatch");
  internal_ops::CheckMask(mask, topo);
  const Tensor& xv = x.value();
  Tensor out = Tensor::Zero(xv.rows(), xv.cols());
  for (int i = 0; i < topo.num_nodes; ++i) {
    for (int p = topo.row_ptr[static_cast<std::size_t>(i)];
         p < topo.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      const double w = coef[pp] * internal_ops::MaskValue(mask, topo.edge_id[pp]);
      if (w != 0.0) out.row(i) += w * xv.row(topo.src[pp]);
    }
  }
  const Var mask_var = mask ? *mask : x;
  return x.tape()->Record(
      std::move(out), {x, mask_var},
      [x, mask, topology, which](Tape& t, const Tensor& g) {
        const Topology& topo = *topology;
        const std::vector<double>& coef =
            which == Coefficients::kGcn ? topo.gcn_coef : topo.mean_coef;
        const bool want_x = x.requires_grad();
        const bool want_m = mask && mask->requires_grad();
        Tensor* dx = want_x ? &t.GradBuffer(x) : nullptr;
        Tensor* dm = want_m ? &t.GradBuffer(*mask) : nullptr;
        for (int i = 0; i < topo.num_nodes; ++i) {
          for (int p = topo.row_ptr[static_cast<std::size_t>(i)];
               p < topo.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            const auto pp = static_cast<std::size_t>(p);
            const int e = topo.edge_id[pp];
            const int j = topo.src[pp];
            if (dx) {
              const double w = coef[pp] * internal_ops::MaskValue(mask, e);
              if (w != 0.0) dx->row(j) += w * g.row(i);
            }
            if (dm && e >= 0) {
              (*dm)(e, 0) += coef[pp] * g.row(i).dot(x.value().row(j));
            }
          }
        }
      });
}

// Normalised attention weights of a single-head GAT layer, one per topology
// entry. Row i sums to one over the entries of node i.
struct Attention {
  std::vector<double> alpha;
  // exp(e - max) / sum_k m_k exp(e_k - max): derivative of alpha w.r.t. m.
  std::vector<double> unit_weight;
  std::vector<double> raw;
};

inline Attention ComputeAttention(const Tensor& z, const Tensor& att_dst,
                                  const Tensor& att_src, const Topology& topo,
                                  const std::optional<Var>& mask,
                                  double slope) {
  const Vector sd = z * att_dst.col(0);
  const Vector ss = z * att_src.col(0);
  Attention a;
  const std::size_t total = topo.src.size();
  a.alpha.resize(total);
  a.unit_weight.resize(total);
  a.raw.resize(total);
  std::vector<double> e(total);
  for (int i = 0; i < topo.num_nodes; ++i) {
    const int begin = topo.row_ptr[static_cast<std::size_t>(i)];
    const int end = topo.row_ptr[static_cast<std::size_t>(i) + 1];
    double top = -std::numeric_limits<double>::infinity();
    for (int p = begin; p < end; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      const double r = sd(i) + ss(topo.src[pp]);
      a.raw[pp] = r;
      e[pp] = r > 0 ? r : slope * r;
      top = std::max(top, e[pp]);
    }
    double sum = 0.0;
    for (int p = begin; p < end; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      e[pp] = std::exp(e[pp] - top);
      sum += internal_ops::MaskValue(mask, topo.edge_id[pp]) * e[pp];
    }
    for (int p = begin; p < end; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      a.unit_weight[pp] = e[pp] / sum;
      a.alpha[pp] =
          internal_ops::MaskValue(mask, topo.edge_id[pp]) * a.unit_weight[pp];
    }
  }
  return a;
}

// h_i = sum_j alpha_ij z_j with alpha_ij = softmax_j(LeakyReLU(a_dst.z_i +
// a_src.z_j)) over j in N(i) + {i}. A mask scales each edge's exp-weight
// before normalisation.
inline Var GatAggregate(Var z, Var att_dst, Var att_src,
                        std::shared_ptr<const Topology> topology,
                        std::optional<Var> mask = std::nullopt,
                        double slope = 0.2) {
  const Topology& topo = *topology;
  internal::Require(z.rows() == topo.num_nodes, "GAT node count mismatch");
  internal::Require(att_dst.rows() == z.cols() && att_dst.cols() == 1 &&
                        att_src.rows() == z.cols() && att_src.cols() == 1,
                    "GAT attention vector shape mismatch");
  internal_ops::CheckMask(mask, topo);
  const Tensor& zv = z.value();
  Attention att =
      ComputeAttention(zv, att_dst.value(), att_src.value(), topo, mask, slope);
  Tensor out = Tensor::Zero(zv.rows(), zv.cols());
  for (int i = 0; i < topo.num_nodes; ++i) {
    for (int p = topo.row_ptr[static_cast<std::size_t>(i)];
         p < topo.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      out.row(i) += att.alpha[pp] * zv.row(topo.src[pp]);
    }
  }
  const Var mask_var = mask ? *mask : z;
  return z.tape()->Record(
      std::move(out), {z, att_dst, att_src, mask_var},
      [z, att_dst, att_src, mask, topology, slope,
       att = std::move(att)](Tape& t, const Tensor& g) {
        const Topology& topo = *topology;
        const Tensor& zv = z.value();
        const Eigen::Index n = zv.rows();
        Vector dsd = Vector::Zero(n);
        Vector dss = Vector::Zero(n);
        const bool want_z = z.requires_grad();
        const bool want_m = mask && mask->requires_grad();
        Tensor* dz = want_z ? &t.GradBuffer(z) : nullptr;
        Tensor* dm = want_m ? &t.GradBuffer(*mask) : nullptr;
        std::vector<double> dalpha;
        for (int i = 0; i < topo.num_nodes; ++i) {
          const int begin = topo.row_ptr[static_cast<std::size_t>(i)];
          const int end = topo.row_ptr[static_cast<std::size_t>(i) + 1];
          dalpha.assign(static_cast<std::size_t>(end - begin), 0.0);
          double dot = 0.0;
          for (int p = begin; p < end; ++p) {
            const auto pp = static_cast<std::size_t>(p);
            const double d = g.row(i).dot(zv.row(topo.src[pp]));
            dalpha[static_cast<std::size_t>(p - begin)] = d;
            dot += att.alpha[pp] * d;
          }
          for (int p = begin; p < end; ++p) {
            const auto pp = static_cast<std::size_t>(p);
            const int j = topo.src[pp];
            const double centered = dalpha[static_cast<std::size_t>(p - begin)] - dot;
            if (dz) dz->row(j) += att.alpha[pp] * g.row(i);
            const double draw =
                att.alpha[pp] * centered * (att.raw[pp] > 0 ? 1.0 : slope);
            dsd(i) += draw;
            dss(j) += draw;
            if (dm && topo.edge_id[pp] >= 0) {
              (*dm)(topo.edge_id[pp], 0) += att.unit_weight[pp] * centered;
            }
          }
        }
        if (dz) {
          dz->noalias() += dsd * att_dst.value().col(0).transpose();
          dz->noalias() += dss * att_src.value().col(0).transpose();
        }
        if (att_dst.requires_grad()) {
          t.GradBuffer(att_dst).col(0).noalias() += zv.transpose() * dsd;
        }
        if (att_src.requires_grad()) {
          t.GradBuffer(att_src).col(0).noalias() += zv.transpose() * dss;
        }
      });
}

// Per graph, per channel: (x - mean) / sqrt(var + eps) * gamma + beta, with
// the population variance over that graph's nodes.
inline Var InstanceNorm(Var x, std::span<const int> graph_offsets, Var gamma,
                        Var beta, double eps = 1e-5) {
  internal::Require(eps > 0.0, "instance norm eps must be positive");
  internal::Require(gamma.rows() == 1 && gamma.cols() == x.cols() &&
                        beta.rows() == 1 && beta.cols() == x.cols(),
                    "instance norm affine shape mismatch");
  internal::Require(!graph_offsets.empty() && graph_offsets.back() == x.rows(),
                    "instance norm offsets do not cover the batch");
  const Tensor& xv = x.value();
  Tensor xhat(xv.rows(), xv.cols());
  Tensor inv_std(static_cast<Eigen::Index>(graph_offsets.size() - 1), xv.cols());
  for (std::size_t k = 0; k + 1 < graph_offsets.size(); ++k) {
    const int a = graph_offsets[k];
    const int n = graph_offsets[k + 1] - a;
    if (n == 0) continue;
    auto block = xv.middleRows(a, n);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    const Tensor centered = block.rowwise() - mean;
    const Eigen::RowVectorXd var =
        centered.array().square().colwise().sum() / static_cast<double>(n);
    const Eigen::RowVectorXd inv = (var.array() + eps).rsqrt();
    inv_std.row(static_cast<Eigen::Index>(k)) = inv;
    xhat.middleRows(a, n) = centered.array().rowwise() * inv.array();
  }
  Tensor out = xhat.array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  std::vector<int> offsets(graph_offsets.begin(), graph_offsets.end());
  return x.tape()->Record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, offsets = std::move(offsets), xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
        if (gamma.requires_grad()) {
          t.GradBuffer(gamma) += g.cwiseProduct(xhat).colwise().sum();
        }
        if (beta.requires_grad()) t.GradBuffer(beta) += g.colwise().sum();
        if (!x.requires_grad()) return;
        Tensor& dx = t.GradBuffer(x);
        const Tensor dxhat = g.array().rowwise() * gamma.value().row(0).array();
        for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
          const int a = offsets[k];
          const int n = offsets[k + 1] - a;
          if (n == 0) continue;
          auto dh = dxhat.middleRows(a, n);
          auto xh = xhat.middleRows(a, n);
          const Eigen::RowVectorXd sum_dh = dh.colwise().sum();
          const Eigen::RowVectorXd sum_dh_xh = dh.cwiseProduct(xh).colwise().sum();
          const double nn = static_cast<double>(n);
          Tensor term = (dh * nn).rowwise() - sum_dh;
          term -= (xh.array().rowwise() * sum_dh_xh.array()).matrix();
          term = term.array().rowwise() *
                 (inv_std.row(static_cast<Eigen::Index>(k)).array() / nn);
          dx.middleRows(a, n) += term;
        }
      });
}


// Channelwise mean or max over each graph's nodes.
inline Var SegmentPool(Var x, std::span<const int> graph_offsets, Pooling mode) {
  internal::Require(!graph_offsets.empty() && graph_offsets.back() == x.rows(),
                    "pool offsets do not cover the batch");
  const Tensor& xv = x.value();
  const auto num_graphs = static_cast<Eigen::Index>(graph_offsets.size() - 1);
  Tensor out = Tensor::Zero(num_graphs, xv.cols());
  std::vector<int> offsets(graph_offsets.begin(), graph_offsets.end());
  if (mode == Pooling::kMean) {
    for (Eigen::Index k = 0; k < num_graphs; ++k) {
      const int a = offsets[static_cast<std::size_t>(k)];
      const int n = offsets[static_cast<std::size_t>(k) + 1] - a;
      internal::Require(n > 0, "cannot pool an empty graph");
      out.row(k) = xv.middleRows(a, n).colwise().mean();
    }
    return x.tape()->Record(
        std::move(out), {x},
        [x, offsets = std::move(offsets)](Tape& t, const Tensor& g) {
          Tensor& dx = t.GradBuffer(x);
          for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
            const int a = offsets[k];
            const int n = offsets[k + 1] - a;
            dx.middleRows(a, n).rowwise() +=
                g.row(static_cast<Eigen::Index>(k)) / static_cast<double>(n);
          }
        });
  }
  std::vector<int> argmax(static_cast<std::size_t>(out.size()));
  for (Eigen::Index k = 0; k < num_graphs; ++k) {
    const int a = offsets[static_cast<std::size_t>(k)];
    const int n = offsets[static_cast<std::size_t>(k) + 1] - a;
    internal::Require(n > 0, "cannot pool an empty graph");
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      int best = a;
      for (int r = a + 1; r < a + n; ++r) {
        if (xv(r, c) > xv(best, c)) best = r;
      }
      out(k, c) = xv(best, c);
      argmax[static_cast<std::size_t>(k * xv.cols() + c)] = best;
    }
  }
  return x.tape()->Record(
      std::move(out), {x},
      [x, argmax = std::move(argmax)](Tape& t, const Tensor& g) {
        Tensor& dx = t.GradBuffer(x);
        const Eigen::Index cols = g.cols();
        for (Eigen::Index k = 0; k < g.rows(); ++k) {
          for (Eigen::Index c = 0; c < cols; ++c) {
            dx(argmax[static_cast<std::size_t>(k * cols + c)], c) += g(k, c);
          }
        }
      });
}

// Mean classification loss over the rows of `logits`. One column means a
// binary task scored with BCE on the logit; otherwise softmax cross entropy.
inline Var ClassificationLoss(Var logits, std::span<const int> labels) {
  internal::Require(static_cast<std::size_t>(logits.rows()) == labels.size(),
                    "one label per logit row required");
  internal::Require(logits.rows() > 0, "loss over an empty batch");
  const Tensor& z = logits.value();
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  Tensor dz(z.rows(), z.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (z.cols() == 1) {
      total += LossBce(z(i, 0), y);
      dz(i, 0) = Sigmoid(z(i, 0)) - y;
    } else {
      const Eigen::RowVectorXd row = z.row(i);
      const std::span<const double> view(row.data(), static_cast<std::size_t>(row.size()));
      const double lse = LogSumExp(view);
      total += LossCe(view, y);
      dz.row(i) = (row.array() - lse).exp();
      dz(i, y) -= 1.0;
    }
  }
  dz *= inv_n;
  Tensor out(1, 1);
  out(0, 0) = total * inv_n;
  return logits.tape()->Record(std::move(out), {logits},
                               [logits, dz = std::move(dz)](Tape& t,
                                                            const Tensor& g) {
                                 t.GradBuffer(logits) += g(0, 0) * dz;
                               });
}

}  // namespace ad
}  // namespace dpgnn
