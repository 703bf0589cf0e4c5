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
#include <numeric>
#include <span>
#include <vector>

#include "dpgnn/errors.hpp"
#include "dpgnn/tensor.hpp"

namespace dpgnn {

struct ClassCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  long long total() const { return tp + fp + tn + fn; }
};

// One-vs-rest counts per class.
struct ConfusionCounts {
  int num_classes = 0;
  std::vector<ClassCounts> per_class;
  long long correct = 0;
  long long total = 0;
};

inline ConfusionCounts ConfusionMatrix(std::span<const int> pred,
                                       std::span<const int> truth,
                                       int num_classes) {
  internal::Require(pred.size() == truth.size(),
                    "prediction and truth lengths differ");
  internal::Require(num_classes >= 2, "need at least two classes");
  ConfusionCounts c;
  c.num_classes = num_classes;
  c.per_class.resize(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int t = truth[i];
    internal::Require(p >= 0 && p < num_classes && t >= 0 && t < num_classes,
                      "class label out of range");
    for (int k = 0; k < num_classes; ++k) {
      ClassCounts& cc = c.per_class[static_cast<std::size_t>(k)];
      const bool is_p = p == k;
      const bool is_t = t == k;
      if (is_p && is_t) ++cc.tp;
      else if (is_p) ++cc.fp;
      else if (is_t) ++cc.fn;
      else ++cc.tn;
    }
    c.correct += p == t;
    ++c.total;
  }
  return c;
}

enum class Averaging {
  // Binary: scores of class 1. Multi-class: micro.
  kAuto,
  kPositiveClass,
  kMicro,
};

struct ClassificationScores {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

namespace internal {

inline double Ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace internal

// accuracy = correct/total, sensitivity = TP/(TP+FN), specificity =
// TN/(TN+FP), F1 = harmonic mean of precision and recall. Micro averaging
// pools the per-class counts first. 0/0 is reported as 0.
inline ClassificationScores ClassificationScoresFrom(const ConfusionCounts& c,
                                                     Averaging averaging = Averaging::kAuto) {
  if (averaging == Averaging::kAuto) {
    averaging = c.num_classes == 2 ? Averaging::kPositiveClass : Averaging::kMicro;
  }
  ClassCounts pooled;
  if (averaging == Averaging::kPositiveClass) {
    internal::Require(c.num_classes == 2, "positive-class scores need a binary task");
    pooled = c.per_class[1];
  } else {
    for (const ClassCounts& cc : c.per_class) {
      pooled.tp += cc.tp;
      pooled.fp += cc.fp;
      pooled.tn += cc.tn;
      pooled.fn += cc.fn;
    }
  }
  const auto tp = static_cast<double>(pooled.tp);
  const auto fp = static_cast<double>(pooled.fp);
  const auto tn = static_cast<double>(pooled.tn);
  const auto fn = static_cast<double>(pooled.fn);
  ClassificationScores s;
  s.accuracy = internal::Ratio(static_cast<double>(c.correct), static_cast<double>(c.total));
  s.sensitivity = internal::Ratio(tp, tp + fn);
  s.specificity = internal::Ratio(tn, tn + fp);
  const double precision = internal::Ratio(tp, tp + fp);
  s.f1 = internal::Ratio(2.0 * precision * s.sensitivity, precision + s.sensitivity);
  return s;
}

// Rank-based (Mann-Whitney) AUC with midranks for ties.
inline double BinaryAuc(std::span<const double> scores, std::span<const int> positive) {
  internal::Require(scores.size() == positive.size(), "score and label lengths differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  long long n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (positive[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const long long n_neg = static_cast<long long>(n) - n_pos;
  internal::Require(n_pos > 0 && n_neg > 0,
                    "AUC needs at least one positive and one negative sample");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

// `scores` holds one row per sample: either a single column with the
// positive-class probability (binary) or one column per class. Binary tasks
// score class 1; multi-class tasks flatten every (sample, class) pair into
// one pooled binary problem.
inline double RocAucMicro(const Tensor& scores, std::span<const int> truth, int num_classes) {
  internal::Require(static_cast<std::size_t>(scores.rows()) == truth.size(),
                    "one score row per sample required");
  for (int t : truth) {
    internal::Require(t >= 0 && t < num_classes, "class label out of range");
  }
  if (num_classes == 2) {
    const Eigen::Index col = scores.cols() == 1 ? 0 : 1;
    std::vector<double> s(truth.size());
    std::vector<int> y(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      s[i] = scores(static_cast<Eigen::Index>(i), col);
      y[i] = truth[i] == 1;
    }
    return BinaryAuc(s, y);
  }
  internal::Require(scores.cols() == num_classes, "need one score column per class");
  std::vector<double> s;
  std::vector<int> y;
  s.reserve(truth.size() * static_cast<std::size_t>(num_classes));
  y.reserve(s.capacity());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int k = 0; k < num_classes; ++k) {
      s.push_back(scores(static_cast<Eigen::Index>(i), k));
      y.push_back(truth[i] == k);
    }
  }
  return BinaryAuc(s, y);
}

}  // namespace dpgnn
