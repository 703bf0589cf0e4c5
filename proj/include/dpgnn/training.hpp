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

// Run configuration, the (DP-)training loop with validation-based model
// selection, evaluation, and across-seed summaries.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dpgnn/accountant.hpp"
#include "dpgnn/datagen.hpp"
#include "dpgnn/dp.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/io.hpp"
#include "dpgnn/metrics.hpp"
#include "dpgnn/model.hpp"
#include "dpgnn/nn.hpp"

namespace dpgnn {

enum class TrainingMode { kSgd, kDpSgd };

inline std::string_view ToString(TrainingMode m) {
  return m == TrainingMode::kSgd ? "sgd" : "dp-sgd";
}

inline TrainingMode ParseTrainingMode(std::string_view s) {
  if (s == "sgd") return TrainingMode::kSgd;
  if (s == "dp-sgd") return TrainingMode::kDpSgd;
  throw InvalidArgument("unknown training mode: " + std::string(s));
}

struct RunConfig {
  // "synthetic", "motif", or a path to a TU directory or dataset JSON file.
  std::string dataset = "synthetic";
  SyntheticSpec synthetic;
  MotifSpec motif;
  // Unset: 60/10/30 percent of the dataset.
  std::optional<SplitSizes> split;
  std::uint64_t split_seed = 0;

  // Architecture preset; overrides below replace individual fields.
  std::string preset = "synthetic";
  ConvType conv = ConvType::kGcn;
  std::optional<std::vector<int>> conv_widths;
  std::optional<std::vector<int>> head_widths;
  std::optional<Pooling> pooling;
  std::optional<double> dropout_rate;
  std::optional<bool> input_instance_norm;
  std::optional<bool> conv_instance_norm;

  TrainingMode mode = TrainingMode::kSgd;
  // Unset: the preset's rate for (conv, mode).
  std::optional<double> learning_rate;
  // Unset: the preset's batch size for the mode.
  std::optional<int> batch_size;
  // SGD epochs, or the DP step budget in epochs when no target epsilon is
  // given. Unset: the preset's default.
  std::optional<int> epochs;

  std::optional<double> target_epsilon;
  double noise_multiplier = 1.0;
  double clip_bound = 3.0;
  // Unset: 1 / |dataset|.
  std::optional<double> delta;

  int n_seeds = 5;
  std::uint64_t seed = 0;
  std::string output_dir;
};

// Table of per-preset learning rates and epoch counts.
inline double DefaultLearningRate(std::string_view preset, ConvType conv,
                                  TrainingMode mode) {
  const bool dp = mode == TrainingMode::kDpSgd;
  auto pick = [conv](double gcn, double gat, double sage) {
    return conv == ConvType::kGcn ? gcn : conv == ConvType::kGat ? gat : sage;
  };
  if (preset == "synthetic" || preset == "scalability") {
    return dp ? pick(0.1, 0.4, 0.2) : pick(0.05, 0.1, 0.04);
  }
  if (preset == "fingerprint") return dp ? pick(0.2, 0.2, 0.1) : 0.08;
  if (preset == "ecg") return dp ? pick(0.12, 0.15, 0.1) : 0.05;
  // Constant rate at the top of the cyclic range.
  if (preset == "molbace") return dp ? 0.1 : pick(0.07, 0.05, 0.07);
  if (preset == "motif") return pick(0.1, 0.1, 0.05);
  throw InvalidArgument("unknown model preset: " + std::string(preset));
}

inline int DefaultBatchSize(std::string_view preset, TrainingMode mode) {
  if (preset == "fingerprint") return 64;
  if (preset == "molbace" && mode == TrainingMode::kSgd) return 64;
  return 24;
}

inline int DefaultEpochs(std::string_view preset) {
  if (preset == "motif") return 100;
  return 30;
}

// Model config from the preset plus overrides. DP runs drop dropout.
inline ModelConfig ResolveModelConfig(const RunConfig& cfg, int num_classes) {
  ModelConfig m = cfg.preset == "motif" ? ModelConfig{} : ModelPreset(cfg.preset, cfg.conv);
  if (cfg.preset == "motif") {
    m.conv_type = cfg.conv;
    m.conv_widths = {32, 32, 32};
    m.head_widths = {32};
    m.pooling = Pooling::kMean;
  }
  if (cfg.conv_widths) m.conv_widths = *cfg.conv_widths;
  if (cfg.head_widths) m.head_widths = *cfg.head_widths;
  if (cfg.pooling) m.pooling = *cfg.pooling;
  if (cfg.dropout_rate) m.dropout_rate = *cfg.dropout_rate;
  if (cfg.input_instance_norm) m.input_instance_norm = *cfg.input_instance_norm;
  if (cfg.conv_instance_norm) m.conv_instance_norm = *cfg.conv_instance_norm;
  if (cfg.mode == TrainingMode::kDpSgd) m.dropout_rate = 0.0;
  m.num_classes = num_classes;
  ValidateModelConfig(m);
  return m;
}

inline void ValidateRunConfig(const RunConfig& cfg) {
  internal::Require(!cfg.dataset.empty(), "dataset must be set");
  if (cfg.batch_size) internal::Require(*cfg.batch_size >= 1, "batch_size must be >= 1");
  internal::Require(cfg.n_seeds >= 1, "n_seeds must be >= 1");
  if (cfg.epochs) internal::Require(*cfg.epochs >= 1, "epochs must be >= 1");
  if (cfg.learning_rate) {
    internal::Require(*cfg.learning_rate > 0.0, "learning_rate must be > 0");
  }
  if (cfg.mode == TrainingMode::kDpSgd) {
    internal::Require(cfg.noise_multiplier >= 0.0, "noise_multiplier must be >= 0");
    internal::Require(cfg.clip_bound > 0.0, "clip_bound must be > 0");
    internal::Require(std::isfinite(cfg.clip_bound) || cfg.noise_multiplier == 0.0,
                      "an infinite clip bound requires zero noise");
    if (cfg.target_epsilon) {
      internal::Require(*cfg.target_epsilon > 0.0, "target_epsilon must be > 0");
      internal::Require(cfg.noise_multiplier > 0.0,
                        "a target epsilon requires a positive noise multiplier");
    }
    if (cfg.delta) {
      internal::Require(*cfg.delta > 0.0 && *cfg.delta < 1.0, "delta must lie in (0, 1)");
    }
  } else {
    internal::Require(!cfg.target_epsilon, "target_epsilon requires mode dp-sgd");
  }
}

struct LoadedData {
  Dataset dataset;
  // Planted ground truth, populated for motif data only.
  std::vector<std::vector<Edge>> motif_edges;
};

inline LoadedData LoadRunDataset(const RunConfig& cfg) {
  LoadedData out;
  if (cfg.dataset == "synthetic") {
    out.dataset = GenErdosRenyiDataset(cfg.synthetic);
  } else if (cfg.dataset == "motif") {
    MotifDataset m = GenMotifDataset(cfg.motif);
    out.dataset = std::move(m.dataset);
    out.motif_edges = std::move(m.motif_edges);
  } else if (fs::is_directory(cfg.dataset)) {
    out.dataset = LoadTuDataset(cfg.dataset);
  } else if (fs::is_regular_file(cfg.dataset)) {
    out.dataset = DatasetFromJson(ReadJsonFile(cfg.dataset), &out.motif_edges);
  } else {
    throw InvalidArgument("dataset not found: " + cfg.dataset);
  }
  ValidateDataset(out.dataset);
  return out;
}

inline SplitSizes ResolveSplit(const RunConfig& cfg, std::size_t n) {
  if (cfg.split) return *cfg.split;
  SplitSizes s;
  s.train = n * 6 / 10;
  s.validation = n / 10;
  s.test = n - s.train - s.validation;
  return s;
}

struct Scores {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  // NaN when the split holds a single class of a binary task.
  double roc_auc = 0.0;
};

inline constexpr std::array<const char*, 5> kScoreNames = {
    "accuracy", "sensitivity", "specificity", "f1", "roc_auc"};

inline std::array<double, 5> ScoreValues(const Scores& s) {
  return {s.accuracy, s.sensitivity, s.specificity, s.f1, s.roc_auc};
}

inline Scores Evaluate(const Model& model, const Dataset& d,
                       std::span<const std::size_t> indices,
                       std::size_t chunk = 64) {
  internal::Require(!indices.empty(), "cannot evaluate on an empty split");
  Tensor probs(static_cast<Eigen::Index>(indices.size()), d.num_classes);
  std::vector<int> truth;
  truth.reserve(indices.size());
  for (std::size_t s = 0; s < indices.size(); s += chunk) {
    std::vector<const Graph*> part;
    for (std::size_t k = s; k < std::min(indices.size(), s + chunk); ++k) {
      part.push_back(&d.graphs[indices[k]]);
    }
    const GraphBatch batch = BatchGraphs(std::span<const Graph* const>(part));
    probs.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(part.size())) =
        ClassProbabilities(ForwardModel(model, batch));
    truth.insert(truth.end(), batch.labels.begin(), batch.labels.end());
  }
  std::vector<int> pred(indices.size());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    pred[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  const ClassificationScores c =
      ClassificationScoresFrom(ConfusionMatrix(pred, truth, d.num_classes));
  Scores s;
  s.accuracy = c.accuracy;
  s.sensitivity = c.sensitivity;
  s.specificity = c.specificity;
  s.f1 = c.f1;
  const bool one_class = std::adjacent_find(truth.begin(), truth.end(),
                                            std::not_equal_to<>()) == truth.end();
  s.roc_auc = d.num_classes == 2 && one_class
                  ? std::numeric_limits<double>::quiet_NaN()
                  : RocAucMicro(probs, truth, d.num_classes);
  return s;
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  // Validation accuracy.
  double val_metric = 0.0;
  std::int64_t steps = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  Scores test;
  int best_epoch = 0;
  double best_val = 0.0;
  std::vector<EpochRecord> curve;
  std::int64_t steps = 0;
  // DP runs only.
  std::optional<double> epsilon;
  std::optional<double> best_order;
  std::optional<RdpCurve> rdp;
  Model best_model;
};

struct MetricSummary {
  double mean = 0.0;
  // Sample standard deviation; 0 for a single seed.
  double std = 0.0;
};

inline MetricSummary Summarize(std::span<const double> v) {
  MetricSummary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Resolved, data-dependent quantities of a run.
struct RunPlan {
  ModelConfig model;
  SplitSizes split_sizes;
  Split split;
  double learning_rate = 0.0;
  int batch_size = 0;
  int epochs = 0;
  int steps_per_epoch = 0;
  // DP only.
  std::optional<PrivacySpec> privacy;
  std::int64_t max_steps = 0;
};

// Throws BudgetError when the target epsilon is below the cost of one step.
inline RunPlan PlanRun(const RunConfig& cfg, const Dataset& d) {
  ValidateRunConfig(cfg);
  RunPlan plan;
  plan.model = ResolveModelConfig(cfg, d.num_classes);
  plan.split_sizes = ResolveSplit(cfg, d.size());
  plan.split = SplitDataset(d, plan.split_sizes, cfg.split_seed);
  internal::Require(!plan.split.train.empty() && !plan.split.validation.empty() &&
                        !plan.split.test.empty(),
                    "train, validation and test splits must be non-empty");
  plan.learning_rate = cfg.learning_rate.value_or(
      DefaultLearningRate(cfg.preset, cfg.conv, cfg.mode));
  plan.epochs = cfg.epochs.value_or(DefaultEpochs(cfg.preset));
  const std::size_t n_train = plan.split.train.size();
  plan.batch_size = cfg.batch_size.value_or(DefaultBatchSize(cfg.preset, cfg.mode));
  const auto b = static_cast<std::size_t>(plan.batch_size);
  plan.steps_per_epoch = static_cast<int>((n_train + b - 1) / b);
  if (cfg.mode == TrainingMode::kDpSgd) {
    PrivacySpec p;
    p.noise_multiplier = cfg.noise_multiplier;
    p.clip_bound = cfg.clip_bound;
    p.sampling_rate = std::min(1.0, static_cast<double>(plan.batch_size) /
                                        static_cast<double>(n_train));
    p.delta = cfg.delta.value_or(1.0 / static_cast<double>(d.size()));
    p.target_epsilon = cfg.target_epsilon;
    ValidatePrivacySpec(p);
    plan.max_steps = cfg.target_epsilon
                         ? MaxSteps(p, *cfg.target_epsilon)
                         : static_cast<std::int64_t>(plan.epochs) * plan.steps_per_epoch;
    plan.privacy = p;
  }
  return plan;
}

// Trains one seed. After every epoch the model is scored on the validation
// split; the best one (first on ties) is scored on the test split. DP runs
// take Poisson-sampled steps until the step budget is used up, and an epoch
// is steps_per_epoch steps.
inline SeedResult TrainSeed(const RunConfig& cfg, const RunPlan& plan,
                            const Dataset& d, std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  Model model = BuildModel(plan.model, d.num_features, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ParameterSet best = model.params;
  r.best_val = -1.0;
  const auto after_epoch = [&](int epoch, double loss, std::int64_t steps) {
    const double val = Evaluate(model, d, plan.split.validation).accuracy;
    r.curve.push_back({epoch, loss, val, steps});
    if (val > r.best_val) {
      r.best_val = val;
      r.best_epoch = epoch;
      best = model.params;
    }
  };

  if (cfg.mode == TrainingMode::kSgd) {
    std::vector<std::size_t> order = plan.split.train;
    const auto b = static_cast<std::size_t>(plan.batch_size);
    for (int epoch = 1; epoch <= plan.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      for (std::size_t s = 0; s < order.size(); s += b) {
        std::vector<const Graph*> part;
        for (std::size_t k = s; k < std::min(order.size(), s + b); ++k) {
          part.push_back(&d.graphs[order[k]]);
        }
        const GraphBatch batch = BatchGraphs(std::span<const Graph* const>(part));
        double loss = 0.0;
        const Vector g = BatchMeanGradient(model, batch, &loss, true, &rng);
        SgdStep(model.params, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())),
                plan.learning_rate);
        loss_sum += loss * static_cast<double>(part.size());
        ++r.steps;
      }
      after_epoch(epoch, loss_sum / static_cast<double>(order.size()), r.steps);
    }
  } else {
    const PrivacySpec& spec = *plan.privacy;
    PrivacyLedger ledger(spec);
    const std::size_t n_train = plan.split.train.size();
    std::vector<const Graph*> train(n_train);
    for (std::size_t i = 0; i < n_train; ++i) train[i] = &d.graphs[plan.split.train[i]];
    int epoch = 0;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    while (ledger.steps() < plan.max_steps) {
      std::vector<const Graph*> batch;
      for (std::size_t i : PoissonSample(n_train, spec.sampling_rate, rng)) {
        batch.push_back(train[i]);
      }
      const DpStepResult step = DpSgdStep(
          model, std::span<const Graph* const>(batch), spec, plan.learning_rate, rng, ledger);
      loss_sum += step.mean_loss * static_cast<double>(step.batch_size);
      seen += step.batch_size;
      if (ledger.steps() % plan.steps_per_epoch == 0 || ledger.steps() == plan.max_steps) {
        after_epoch(++epoch, seen ? loss_sum / static_cast<double>(seen) : 0.0,
                    ledger.steps());
        loss_sum = 0.0;
        seen = 0;
      }
    }
    internal::Require(ledger.steps() <= plan.max_steps, "step budget exceeded");
    r.steps = ledger.steps();
    r.epsilon = ledger.epsilon();
    r.best_order = ledger.best_order();
    r.rdp = ledger.curve();
  }
  model.params = std::move(best);
  r.test = Evaluate(model, d, plan.split.test);
  r.best_model = std::move(model);
  return r;
}

struct RunReport {
  Json config;
  RunPlan plan;
  std::vector<SeedResult> seeds;
  std::array<MetricSummary, 5> summary;
  double elapsed_seconds = 0.0;
};

inline Json ToJson(const RunConfig& c) {
  Json j = {{"dataset", c.dataset},
            {"preset", c.preset},
            {"conv", std::string(ToString(c.conv))},
            {"mode", std::string(ToString(c.mode))},
            {"noise_multiplier", c.noise_multiplier},
            {"clip_bound", std::isfinite(c.clip_bound) ? Json(c.clip_bound) : Json("inf")},
            {"n_seeds", c.n_seeds},
            {"seed", c.seed},
            {"split_seed", c.split_seed}};
  if (c.dataset == "synthetic") j["synthetic"] = ToJson(c.synthetic);
  if (c.dataset == "motif") j["motif"] = ToJson(c.motif);
  if (c.split) j["split"] = {c.split->train, c.split->validation, c.split->test};
  if (c.learning_rate) j["learning_rate"] = *c.learning_rate;
  if (c.epochs) j["epochs"] = *c.epochs;
  if (c.batch_size) j["batch_size"] = *c.batch_size;
  if (c.target_epsilon) j["target_epsilon"] = *c.target_epsilon;
  if (c.delta) j["delta"] = *c.delta;
  return j;
}

inline Json ToJson(const Scores& s) {
  Json j;
  const auto v = ScoreValues(s);
  for (std::size_t k = 0; k < v.size(); ++k) j[kScoreNames[k]] = v[k];
  return j;
}

inline Json ToJson(const RdpCurve& c) {
  return {{"orders", c.orders}, {"values", c.values}};
}

inline Json ToJson(const RunReport& r) {
  Json seeds = Json::array();
  for (const SeedResult& s : r.seeds) {
    Json j = {{"seed", s.seed},
              {"test", ToJson(s.test)},
              {"best_epoch", s.best_epoch},
              {"best_val_accuracy", s.best_val},
              {"steps", s.steps}};
    if (s.epsilon) {
      j["ledger"] = {{"epsilon", *s.epsilon},
                     {"order", *s.best_order},
                     {"steps", s.steps},
                     {"delta", r.plan.privacy->delta},
                     {"rdp", ToJson(*s.rdp)}};
    }
    seeds.push_back(std::move(j));
  }
  Json summary;
  for (std::size_t k = 0; k < r.summary.size(); ++k) {
    summary[kScoreNames[k]] = {{"mean", r.summary[k].mean}, {"std", r.summary[k].std}};
  }
  Json resolved = {{"model", ToJson(r.plan.model)},
                   {"learning_rate", r.plan.learning_rate},
                   {"batch_size", r.plan.batch_size},
                   {"epochs", r.plan.epochs},
                   {"steps_per_epoch", r.plan.steps_per_epoch},
                   {"split", {r.plan.split_sizes.train, r.plan.split_sizes.validation,
                              r.plan.split_sizes.test}}};
  Json out = {{"config", r.config},     {"resolved", std::move(resolved)},
              {"seeds", std::move(seeds)}, {"summary", std::move(summary)},
              {"elapsed_seconds", r.elapsed_seconds}};
  if (r.plan.privacy) {
    const PrivacySpec& p = *r.plan.privacy;
    out["privacy"] = {{"noise_multiplier", p.noise_multiplier},
                      {"clip_bound", p.clip_bound},
                      {"sampling_rate", p.sampling_rate},
                      {"delta", p.delta},
                      {"max_steps", r.plan.max_steps},
                      {"epsilon", r.seeds.front().epsilon.value_or(0.0)}};
    if (p.target_epsilon) out["privacy"]["target_epsilon"] = *p.target_epsilon;
  }
  return out;
}

inline std::string CurvesCsv(const RunReport& r) {
  std::string s = "seed,epoch,steps,train_loss,val_metric\n";
  for (const SeedResult& seed : r.seeds) {
    for (const EpochRecord& e : seed.curve) {
      s += std::to_string(seed.seed) + "," + std::to_string(e.epoch) + "," +
           std::to_string(e.steps) + "," + internal::FormatDouble(e.train_loss) + "," +
           internal::FormatDouble(e.val_metric) + "\n";
    }
  }
  return s;
}

// Called after every finished seed, e.g. for progress logging.
using SeedCallback = std::function<void(const SeedResult&)>;

// Trains seeds cfg.seed, cfg.seed + 1, ... on a fixed dataset and split.
inline RunReport TrainRun(const RunConfig& cfg, const Dataset& d,
                          const SeedCallback& on_seed = {}) {
  RunReport r;
  r.config = ToJson(cfg);
  r.plan = PlanRun(cfg, d);
  const auto start = std::chrono::steady_clock::now();
  std::array<std::vector<double>, 5> values;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    SeedResult s = TrainSeed(cfg, r.plan, d, cfg.seed + static_cast<std::uint64_t>(i));
    const auto v = ScoreValues(s.test);
    for (std::size_t k = 0; k < v.size(); ++k) values[k].push_back(v[k]);
    if (on_seed) on_seed(s);
    r.seeds.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < values.size(); ++k) r.summary[k] = Summarize(values[k]);
  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace dpgnn
