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

// Renyi-DP accounting for the Poisson-subsampled Gaussian mechanism.
//
// Per step, the integer-order RDP of sampling each example with probability
// q and adding N(0, sigma^2) noise at unit sensitivity is
//
//   1/(a-1) * log sum_{k=0..a} C(a,k) (1-q)^(a-k) q^k exp(k(k-1)/(2 sigma^2)).
//
// Composition over T steps multiplies the curve by T, and an RDP curve is
// converted to (eps, delta) via eps = min_a rdp(a) + log(1/delta)/(a-1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "dpgnn/errors.hpp"

namespace dpgnn {

struct PrivacySpec {
  // Noise std on the clipped-gradient sum is noise_multiplier * clip_bound.
  double noise_multiplier = 1.0;
  // L2 radius per example. +infinity disables clipping (requires sigma = 0).
  double clip_bound = 1.0;
  double sampling_rate = 1.0;
  double delta = 1e-5;
  std::optional<double> target_epsilon;
};

inline void ValidatePrivacySpec(const PrivacySpec& s) {
  internal::Require(s.noise_multiplier >= 0.0 && std::isfinite(s.noise_multiplier),
                    "noise multiplier must be finite and >= 0");
  internal::Require(s.clip_bound > 0.0 && !std::isnan(s.clip_bound),
                    "clip bound must be > 0");
  internal::Require(std::isfinite(s.clip_bound) || s.noise_multiplier == 0.0,
                    "an infinite clip bound is only valid with zero noise");
  internal::Require(s.sampling_rate > 0.0 && s.sampling_rate <= 1.0,
                    "sampling rate must lie in (0, 1]");
  internal::Require(s.delta > 0.0 && s.delta < 1.0, "delta must lie in (0, 1)");
  if (s.target_epsilon) {
    internal::Require(*s.target_epsilon > 0.0, "target epsilon must be > 0");
  }
}

struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> values;

  std::size_t size() const { return orders.size(); }
};

// {1.25, 1.5, 1.75} followed by the integers 2..256.
inline std::vector<double> DefaultOrders() {
  std::vector<double> orders{1.25, 1.5, 1.75};
  for (int a = 2; a <= 256; ++a) orders.push_back(a);
  return orders;
}

// RDP of the Gaussian mechanism at unit sensitivity: a / (2 sigma^2).
inline double RdpGaussian(double order, double sigma) {
  internal::Require(order > 1.0, "RDP order must be > 1");
  internal::Require(sigma > 0.0, "sigma must be > 0");
  return order / (2.0 * sigma * sigma);
}

namespace internal {

inline double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log(exp(x) - 1) for x > 0.
inline double LogExpm1(double x) {
  return x > 1.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

}  // namespace internal

// Integer-order RDP of the Poisson-subsampled Gaussian mechanism.
//
// The binomial weights sum to one and the k = 0, 1 exponents vanish, so the
// sum is 1 + sum_{k>=2} w_k expm1(k(k-1)/(2 sigma^2)). Every term of that
// tail is positive, which keeps the log-space evaluation free of
// cancellation even when the result is tiny.
inline double RdpSubsampledGaussian(int order, double q, double sigma) {
  internal::Require(order >= 2, "subsampled RDP needs an integer order >= 2");
  internal::Require(q >= 0.0 && q <= 1.0, "sampling rate must lie in [0, 1]");
  internal::Require(sigma > 0.0, "sigma must be > 0");
  if (q == 0.0) return 0.0;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(order));
  for (int k = 2; k <= order; ++k) {
    double t = internal::LogBinomial(order, k) + k * log_q +
               internal::LogExpm1(k * (k - 1.0) * inv_two_var);
    if (k < order) t += (order - k) * log_1mq;
    terms.push_back(t);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == -std::numeric_limits<double>::infinity()) return 0.0;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  const double log_tail = top + std::log(s);
  // log(1 + exp(log_tail))
  const double log_sum = log_tail > 0.0
                             ? log_tail + std::log1p(std::exp(-log_tail))
                             : std::log1p(std::exp(log_tail));
  return log_sum / (order - 1.0);
}

// Per-step RDP curve. Fractional orders only have the unsubsampled bound, so
// they are kept when q = 1 and dropped otherwise.
inline RdpCurve StepCurve(double q, double sigma,
                          const std::vector<double>& orders = DefaultOrders()) {
  internal::Require(!orders.empty(), "order grid is empty");
  RdpCurve c;
  for (double a : orders) {
    internal::Require(a > 1.0, "RDP orders must be > 1");
    const bool integer = std::floor(a) == a;
    if (sigma == 0.0) {
      c.orders.push_back(a);
      c.values.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    if (integer) {
      c.orders.push_back(a);
      c.values.push_back(RdpSubsampledGaussian(static_cast<int>(a), q, sigma));
    } else if (q == 1.0) {
      c.orders.push_back(a);
      c.values.push_back(RdpGaussian(a, sigma));
    }
  }
  return c;
}

// Pointwise steps x per-step curve.
inline RdpCurve Compose(const RdpCurve& per_step, std::int64_t steps) {
  internal::Require(steps >= 0, "step count must be >= 0");
  RdpCurve c = per_step;
  for (double& v : c.values) v = steps == 0 ? 0.0 : v * static_cast<double>(steps);
  return c;
}

inline RdpCurve ComposeCurves(const RdpCurve& a, const RdpCurve& b) {
  internal::Require(a.orders == b.orders, "cannot compose curves on different grids");
  RdpCurve c = a;
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] += b.values[i];
  return c;
}

struct EpsilonResult {
  double epsilon = 0.0;
  double order = 0.0;
};

inline EpsilonResult ToEpsDelta(const RdpCurve& curve, double delta) {
  internal::Require(curve.size() > 0 && curve.orders.size() == curve.values.size(),
                    "empty RDP curve");
  internal::Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  EpsilonResult best{std::numeric_limits<double>::infinity(), curve.orders.front()};
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double a = curve.orders[i];
    const double eps = curve.values[i] + log_inv_delta / (a - 1.0);
    if (eps < best.epsilon) best = {eps, a};
  }
  return best;
}

// Tracks privacy spending of one training run. Only the training loop writes
// to it.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(PrivacySpec spec,
                         std::vector<double> orders = DefaultOrders())
      : spec_(std::move(spec)) {
    ValidatePrivacySpec(spec_);
    per_step_ = StepCurve(spec_.sampling_rate, spec_.noise_multiplier, orders);
  }

  const PrivacySpec& spec() const { return spec_; }
  std::int64_t steps() const { return steps_; }
  const RdpCurve& per_step() const { return per_step_; }
  RdpCurve curve() const { return Compose(per_step_, steps_); }

  double EpsilonAfter(std::int64_t steps) const {
    return ToEpsDelta(Compose(per_step_, steps), spec_.delta).epsilon;
  }
  double epsilon() const { return EpsilonAfter(steps_); }
  double best_order() const {
    return ToEpsDelta(curve(), spec_.delta).order;
  }

  // True if one more step keeps epsilon within the target (always true
  // without a target).
  bool CanStep() const {
    return !spec_.target_epsilon || EpsilonAfter(steps_ + 1) <= *spec_.target_epsilon;
  }

  void RecordStep() {
    if (!CanStep()) {
      throw BudgetError("privacy budget exhausted after " +
                        std::to_string(steps_) + " steps");
    }
    ++steps_;
  }

 private:
  PrivacySpec spec_;
  RdpCurve per_step_;
  std::int64_t steps_ = 0;
};

// Largest T with epsilon(T) <= target at the spec's delta. Throws BudgetError
// if even one step overshoots.
inline std::int64_t MaxSteps(const PrivacySpec& spec, double target_epsilon) {
  internal::Require(target_epsilon > 0.0, "target epsilon must be > 0");
  PrivacySpec s = spec;
  s.target_epsilon.reset();
  const PrivacyLedger ledger(s);
  if (ledger.EpsilonAfter(1) > target_epsilon) {
    throw BudgetError("target epsilon " + std::to_string(target_epsilon) +
                      " is below the cost of a single step (" +
                      std::to_string(ledger.EpsilonAfter(1)) + ")");
  }
  std::int64_t lo = 1;
  std::int64_t hi = 2;
  constexpr std::int64_t kCap = std::int64_t{1} << 40;
  while (hi < kCap && ledger.EpsilonAfter(hi) <= target_epsilon) {
    lo = hi;
    hi *= 2;
  }
  if (hi >= kCap) return kCap;
  // invariant: eps(lo) <= target < eps(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (ledger.EpsilonAfter(mid) <= target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Monte-Carlo estimate of the privacy loss of the scalar Gaussian mechanism
// on adjacent inputs 0 and 1 (sensitivity 1). For every threshold t on the
// sorted samples the event {y >= t} gives eps(t) = log((P1 - delta) / P0);
// the estimate is the largest eps(t) among events that both distributions
// hit at least `min_count` times, floored at 0.
inline double EmpiricalAudit(double sigma, std::int64_t trials, double delta,
                             std::uint64_t seed = 0,
                             std::int64_t min_count = 50) {
  internal::Require(sigma > 0.0, "sigma must be > 0");
  internal::Require(trials >= 100000, "audit needs at least 1e5 trials");
  internal::Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const auto n = static_cast<std::size_t>(trials);
  std::vector<double> y0(n), y1(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = noise(rng);
  for (std::size_t i = 0; i < n; ++i) y1[i] = 1.0 + noise(rng);
  std::sort(y0.begin(), y0.end());
  std::sort(y1.begin(), y1.end());
  double best = 0.0;
  const double total = static_cast<double>(n);
  // Thresholds at the order statistics of y0, geometrically spaced from the
  // top so the tail is covered densely.
  for (auto c0 = static_cast<std::size_t>(min_count); c0 <= n;
       c0 += std::max<std::size_t>(1, c0 / 64)) {
    const double t = y0[n - c0];
    const auto c1 = static_cast<std::int64_t>(
        y1.end() - std::lower_bound(y1.begin(), y1.end(), t));
    if (c1 < min_count) continue;
    const double p0 = static_cast<double>(c0) / total;
    const double p1 = static_cast<double>(c1) / total;
    if (p1 > delta) best = std::max(best, std::log((p1 - delta) / p0));
  }
  return best;
}

}  // namespace dpgnn
