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

// DP-SGD: Poisson batch sampling, per-example L2 clipping, Gaussian noise on
// the clipped sum, and the parameter update.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "dpgnn/accountant.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/model.hpp"
#include "dpgnn/nn.hpp"

namespace dpgnn {

// Each index in [0, n) is included independently with probability q.
template <typename Rng>
std::vector<std::size_t> PoissonSample(std::size_t n, double q, Rng& rng) {
  internal::Require(q >= 0.0 && q <= 1.0, "sampling rate must lie in [0, 1]");
  std::vector<std::size_t> out;
  if (q == 1.0) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  std::bernoulli_distribution include(q);
  for (std::size_t i = 0; i < n; ++i) {
    if (include(rng)) out.push_back(i);
  }
  return out;
}

// Scales `row` by min(1, C/||row||). Returns the applied factor.
inline double ClipRow(std::span<double> row, double clip_bound) {
  internal::Require(clip_bound > 0.0, "clip bound must be > 0");
  if (std::isinf(clip_bound)) return 1.0;
  Eigen::Map<Vector> v(row.data(), static_cast<Eigen::Index>(row.size()));
  const double norm = v.norm();
  if (norm <= clip_bound) return 1.0;
  const double scale = clip_bound / norm;
  v *= scale;
  return scale;
}

inline PerSampleGrads ClipPerSample(PerSampleGrads grads, double clip_bound) {
  for (Eigen::Index i = 0; i < grads.rows(); ++i) {
    ClipRow(std::span<double>(grads.row(i).data(),
                              static_cast<std::size_t>(grads.cols())),
            clip_bound);
  }
  return grads;
}

// Adds N(0, (sigma C)^2) to each coordinate of `sum` in place.
template <typename Rng>
void AddGaussianNoise(std::span<double> sum, double noise_multiplier,
                      double clip_bound, Rng& rng) {
  if (noise_multiplier == 0.0) return;
  internal::Require(std::isfinite(clip_bound),
                    "noise requires a finite clip bound");
  std::normal_distribution<double> noise(0.0, noise_multiplier * clip_bound);
  for (double& v : sum) v += noise(rng);
}

// (sum_i g_i + xi) / B with xi ~ N(0, (sigma C)^2 I). Rows must already be
// clipped to C. Throws InvalidArgument on an empty batch; callers skip the
// update in that case.
template <typename Rng>
Vector NoisyMean(const PerSampleGrads& clipped, double noise_multiplier,
                 double clip_bound, Rng& rng) {
  internal::Require(clipped.rows() > 0, "empty batch: skip the update");
  Vector sum = clipped.colwise().sum().transpose();
  AddGaussianNoise(std::span<double>(sum.data(), static_cast<std::size_t>(sum.size())),
                   noise_multiplier, clip_bound, rng);
  return sum / static_cast<double>(clipped.rows());
}

struct DpStepResult {
  std::size_t batch_size = 0;
  bool updated = false;
  double mean_loss = 0.0;
  // Fraction of examples whose gradient norm exceeded C.
  double clipped_fraction = 0.0;
};

// One DP-SGD iteration on the examples `batch` (already drawn by Poisson
// sampling): per-example gradients, clipping, noisy mean, SGD update. The
// ledger is charged exactly once, also for an empty batch, which only skips
// the update. Per-example rows are clipped and summed as they are produced
// instead of being materialised as a B x P matrix.
template <typename Rng>
DpStepResult DpSgdStep(Model& model, std::span<const Graph* const> batch,
                       const PrivacySpec& spec, double lr, Rng& rng,
                       PrivacyLedger& ledger) {
  ValidatePrivacySpec(spec);
  if (!ledger.CanStep()) {
    throw BudgetError("privacy budget exhausted after " +
                      std::to_string(ledger.steps()) + " steps");
  }
  DpStepResult result;
  result.batch_size = batch.size();
  const std::size_t p = model.params.size();
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(p));
  Vector row(static_cast<Eigen::Index>(p));
  std::size_t clipped = 0;
  double loss = 0.0;
  for (const Graph* g : batch) {
    const std::span<double> view(row.data(), p);
    loss += ExampleGradient(model, *g, view);
    if (ClipRow(view, spec.clip_bound) < 1.0) ++clipped;
    sum += row;
  }
  // Drawn for empty batches too.
  AddGaussianNoise(std::span<double>(sum.data(), p), spec.noise_multiplier,
                   spec.clip_bound, rng);
  ledger.RecordStep();
  if (batch.empty()) return result;
  const double b = static_cast<double>(batch.size());
  sum /= b;
  SgdStep(model.params, std::span<const double>(sum.data(), p), lr);
  result.updated = true;
  result.mean_loss = loss / b;
  result.clipped_fraction = static_cast<double>(clipped) / b;
  return result;
}

}  // namespace dpgnn
