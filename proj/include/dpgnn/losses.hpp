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
#include <cmath>
#include <span>

#include "dpgnn/errors.hpp"

namespace dpgnn {

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Binary cross entropy on a logit: -[y log s(z) + (1-y) log(1-s(z))].
inline double LossBce(double logit, int label) {
  internal::Require(label == 0 || label == 1, "binary label must be 0 or 1");
  return label == 1 ? Softplus(-logit) : Softplus(logit);
}

inline double LogSumExp(std::span<const double> xs) {
  const auto top = std::max_element(xs.begin(), xs.end());
  const double m = *top;
  double rest = 0.0;
  for (auto it = xs.begin(); it != xs.end(); ++it) {
    if (it != top) rest += std::exp(*it - m);
  }
  return m + std::log1p(rest);
}

// -log softmax(logits)[label].
inline double LossCe(std::span<const double> logits, int label) {
  internal::Require(logits.size() >= 2, "cross entropy needs >= 2 logits");
  internal::Require(label >= 0 && static_cast<std::size_t>(label) < logits.size(),
                    "label out of range");
  // (m - z_y) + log(1 + sum_{j != argmax} exp(z_j - m)) keeps full relative
  // precision when the label holds the largest logit.
  const auto top = std::max_element(logits.begin(), logits.end());
  double rest = 0.0;
  for (auto it = logits.begin(); it != logits.end(); ++it) {
    if (it != top) rest += std::exp(*it - *top);
  }
  return (*top - logits[static_cast<std::size_t>(label)]) + std::log1p(rest);
}

}  // namespace dpgnn
