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

// The four CLI commands as library functions. Each writes its outputs
// atomically into the requested location and returns the in-memory result.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpgnn/explainer.hpp"
#include "dpgnn/io.hpp"
#include "dpgnn/training.hpp"

namespace dpgnn {

struct TrainOptions {
  // Best model of the first seed, as output_dir/checkpoint.json.
  bool save_checkpoint = true;
  // Progress lines; may be null.
  std::ostream* log = nullptr;
};

// Writes report.json and curves.csv (and the checkpoint) into
// cfg.output_dir when it is set.
inline RunReport CmdTrain(const RunConfig& cfg, const TrainOptions& opts = {}) {
  const LoadedData data = LoadRunDataset(cfg);
  RunReport report = TrainRun(cfg, data.dataset, [&](const SeedResult& s) {
    if (!opts.log) return;
    *opts.log << "seed " << s.seed << ": test accuracy " << s.test.accuracy
              << ", best epoch " << s.best_epoch << ", steps " << s.steps;
    if (s.epsilon) *opts.log << ", epsilon " << *s.epsilon;
    *opts.log << "\n";
  });
  if (!cfg.output_dir.empty()) {
    const fs::path dir(cfg.output_dir);
    WriteJsonFile(dir / "report.json", ToJson(report), 2);
    WriteTextFileAtomic(dir / "curves.csv", CurvesCsv(report));
    if (opts.save_checkpoint) {
      SaveCheckpoint(report.seeds.front().best_model, dir / "checkpoint.json");
    }
  }
  return report;
}

enum class SweepVariable { kEpsilon, kGraphSize };

inline SweepVariable ParseSweepVariable(std::string_view s) {
  if (s == "epsilon") return SweepVariable::kEpsilon;
  if (s == "graph_size" || s == "graph-size") return SweepVariable::kGraphSize;
  throw InvalidArgument("unknown sweep variable: " + std::string(s));
}

inline std::string_view ToString(SweepVariable v) {
  return v == SweepVariable::kEpsilon ? "epsilon" : "graph_size";
}

inline std::vector<double> DefaultSweepValues(SweepVariable v) {
  if (v == SweepVariable::kEpsilon) return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20};
  return {10, 20, 30, 40, 50};
}

// Target epsilon of the graph-size sweep when none is configured.
inline constexpr double kGraphSizeSweepEpsilon = 2.3;

struct SweepRow {
  double value = 0.0;
  std::array<MetricSummary, 5> summary;
  std::int64_t steps = 0;
  double epsilon = 0.0;
};

inline std::string SweepCsv(SweepVariable variable, const std::vector<SweepRow>& rows) {
  std::string s(ToString(variable));
  for (const char* name : kScoreNames) {
    s += std::string(",") + name + "_mean," + name + "_std";
  }
  s += ",steps,epsilon\n";
  for (const SweepRow& r : rows) {
    s += internal::FormatDouble(r.value);
    for (const MetricSummary& m : r.summary) {
      s += "," + internal::FormatDouble(m.mean) + "," + internal::FormatDouble(m.std);
    }
    s += "," + std::to_string(r.steps) + "," + internal::FormatDouble(r.epsilon) + "\n";
  }
  return s;
}

// Runs CmdTrain once per value in DP mode. Epsilon values set the target
// epsilon; graph sizes set the synthetic node count and default the target
// to 2.3. Per-value reports go to output_dir/<variable>_<value>/ and the
// table to output_dir/sweep.csv.
inline std::vector<SweepRow> CmdSweep(const RunConfig& base, SweepVariable variable,
                                      const std::vector<double>& values,
                                      const TrainOptions& opts = {}) {
  internal::Require(!values.empty(), "sweep needs at least one value");
  if (variable == SweepVariable::kGraphSize) {
    internal::Require(base.dataset == "synthetic",
                      "the graph-size sweep runs on the synthetic dataset");
  }
  std::vector<SweepRow> rows;
  for (double v : values) {
    RunConfig cfg = base;
    cfg.mode = TrainingMode::kDpSgd;
    if (variable == SweepVariable::kEpsilon) {
      internal::Require(v > 0.0, "epsilon values must be > 0");
      cfg.target_epsilon = v;
    } else {
      internal::Require(v >= 1.0 && v == std::floor(v),
                        "graph sizes must be positive integers");
      cfg.synthetic.nodes_per_graph = static_cast<int>(v);
      if (!cfg.target_epsilon) cfg.target_epsilon = kGraphSizeSweepEpsilon;
    }
    if (!base.output_dir.empty()) {
      cfg.output_dir =
          (fs::path(base.output_dir) / (std::string(ToString(variable)) + "_" + internal::FormatDouble(v)))
              .string();
    }
    if (opts.log) *opts.log << ToString(variable) << " = " << internal::FormatDouble(v) << "\n";
    TrainOptions inner = opts;
    inner.save_checkpoint = false;
    const RunReport report = CmdTrain(cfg, inner);
    SweepRow row;
    row.value = v;
    row.summary = report.summary;
    row.steps = report.seeds.front().steps;
    row.epsilon = report.seeds.front().epsilon.value_or(0.0);
    rows.push_back(row);
  }
  if (!base.output_dir.empty()) {
    WriteTextFileAtomic(fs::path(base.output_dir) / "sweep.csv", SweepCsv(variable, rows));
  }
  return rows;
}

struct ExplainRequest {
  std::string checkpoint_a;
  std::string checkpoint_b;
  // Dataset and split selection; the explained graphs are the first
  // n_samples test graphs that have at least one edge.
  RunConfig data;
  int n_samples = 10;
  ExplainerConfig explainer;
  // Target file; empty skips writing.
  std::string output_path;
};

struct ExplainResult {
  IouReport report;
  Json json;
};

inline void CheckCompatible(const Model& m, const Dataset& d, const std::string& name) {
  internal::Require(m.num_features == d.num_features,
                    "checkpoint " + name + " expects " + std::to_string(m.num_features) +
                        " node features, dataset has " + std::to_string(d.num_features));
  internal::Require(m.config.num_classes == d.num_classes,
                    "checkpoint " + name + " was trained for " +
                        std::to_string(m.config.num_classes) + " classes, dataset has " +
                        std::to_string(d.num_classes));
}

inline Json EdgesToJson(std::span<const Edge> edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back({e.u, e.v});
  return out;
}

inline ExplainResult CmdExplain(const ExplainRequest& req) {
  internal::Require(req.n_samples >= 1, "n_samples must be >= 1");
  ValidateExplainerConfig(req.explainer);
  const Model a = LoadCheckpoint(req.checkpoint_a);
  const Model b = LoadCheckpoint(req.checkpoint_b);
  const LoadedData data = LoadRunDataset(req.data);
  const Dataset& d = data.dataset;
  CheckCompatible(a, d, req.checkpoint_a);
  CheckCompatible(b, d, req.checkpoint_b);
  const Split split = SplitDataset(d, ResolveSplit(req.data, d.size()), req.data.split_seed);

  std::vector<Graph> graphs;
  std::vector<std::size_t> indices;
  for (std::size_t i : split.test) {
    if (static_cast<int>(graphs.size()) == req.n_samples) break;
    if (d.graphs[i].num_edges() == 0) continue;
    graphs.push_back(d.graphs[i]);
    indices.push_back(i);
  }
  internal::Require(!graphs.empty(), "the test split has no graph with edges");

  ExplainResult out;
  out.report = CompareModels(a, b, graphs, req.explainer, indices);
  Json records = Json::array();
  for (const IouRecord& r : out.report.records) {
    const Graph& g = d.graphs[r.graph_index];
    Json j = {{"graph_index", r.graph_index},
              {"label", g.label()},
              {"edges", EdgesToJson(g.edges())},
              {"mask_a", r.mask_a},
              {"mask_b", r.mask_b},
              {"explained_a", EdgesToJson(r.edges_a)},
              {"explained_b", EdgesToJson(r.edges_b)},
              {"iou_original_a", r.iou_original_a},
              {"iou_original_b", r.iou_original_b},
              {"iou_a_b", r.iou_a_b}};
    if (!data.motif_edges.empty()) j["motif_edges"] = EdgesToJson(data.motif_edges[r.graph_index]);
    records.push_back(std::move(j));
  }
  const ExplainerConfig& c = req.explainer;
  out.json = {{"checkpoint_a", req.checkpoint_a},
              {"checkpoint_b", req.checkpoint_b},
              {"dataset", req.data.dataset},
              {"n_samples", req.n_samples},
              {"explainer",
               {{"iterations", c.iterations},
                {"learning_rate", c.learning_rate},
                {"size_penalty", c.size_penalty},
                {"entropy_penalty", c.entropy_penalty},
                {"threshold", c.threshold},
                {"optimizer", c.optimizer == MaskOptimizer::kAdam ? "adam" : "sgd"},
                {"seed", c.seed}}},
              {"records", std::move(records)},
              {"mean_iou_original_a", out.report.mean_original_a},
              {"mean_iou_original_b", out.report.mean_original_b},
              {"mean_iou_a_b", out.report.mean_a_b}};
  if (!req.output_path.empty()) WriteJsonFile(req.output_path, out.json, 2);
  return out;
}

enum class DataFormat { kJson, kTu };

struct GenDataRequest {
  // "synthetic" or "motif".
  std::string kind = "synthetic";
  SyntheticSpec synthetic;
  MotifSpec motif;
  DataFormat format = DataFormat::kJson;
  // JSON file, or directory for the TU format.
  std::string out_path;
  bool force = false;
};

// Table-style summary "mean nodes / graphs / features / classes".
inline std::string DatasetSummary(const Dataset& d) {
  const double mean = MeanNodeCount(d);
  char buf[64];
  if (mean == std::floor(mean)) {
    std::snprintf(buf, sizeof buf, "%.0f", mean);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", mean);
  }
  return std::string(buf) + " / " + std::to_string(d.size()) + " / " +
         std::to_string(d.num_features) + " / " + std::to_string(d.num_classes);
}

inline bool PathOccupied(const fs::path& p) {
  if (!fs::exists(p)) return false;
  if (fs::is_directory(p)) return !fs::is_empty(p);
  return fs::file_size(p) > 0;
}

// Returns the summary line.
inline std::string CmdGenData(const GenDataRequest& req) {
  internal::Require(!req.out_path.empty(), "an output path is required");
  const fs::path out(req.out_path);
  internal::Require(req.force || !PathOccupied(out),
                    out.string() + " exists and is not empty (use --force)");
  Dataset d;
  Json generator;
  std::vector<std::vector<Edge>> motif_edges;
  if (req.kind == "synthetic") {
    d = GenErdosRenyiDataset(req.synthetic);
    generator = ToJson(req.synthetic);
  } else if (req.kind == "motif") {
    MotifDataset m = GenMotifDataset(req.motif);
    d = std::move(m.dataset);
    motif_edges = std::move(m.motif_edges);
    generator = ToJson(req.motif);
  } else {
    throw InvalidArgument("unknown dataset kind: " + req.kind);
  }
  generator["kind"] = req.kind;
  try {
    if (req.format == DataFormat::kJson) {
      WriteJsonFile(out, DatasetToJson(d, generator, motif_edges.empty() ? nullptr : &motif_edges));
    } else {
      if (req.force && fs::exists(out)) fs::remove_all(out);
      WriteTuDataset(d, out, d.name);
    }
  } catch (const fs::filesystem_error& e) {
    throw InvalidArgument(std::string("cannot write dataset: ") + e.what());
  }
  std::string summary = DatasetSummary(d);
  if (!motif_edges.empty()) {
    std::size_t count = 0;
    for (const auto& m : motif_edges) count += m.size();
    summary += " (ground-truth motif edges: " + std::to_string(count) + ")";
  }
  return summary;
}

}  // namespace dpgnn
