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

// dpgnn command-line driver: gen-data, train, sweep, explain.
//
// Every option can also come from a TOML/INI file given with --config, in a
// section named after the command; flags on the command line override file
// values.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 privacy budget error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpgnn/dpgnn.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

// Raw flag values; optional fields are applied only when given.
struct RunFlags {
  dpgnn::RunConfig cfg;
  std::uint64_t data_seed = 0;
  std::vector<std::size_t> split;
  std::string conv = "gcn";
  std::string mode = "sgd";
  std::vector<int> conv_widths;
  std::vector<int> head_widths;
  std::string pooling;
  double dropout_rate = 0.0;
  bool input_norm = false;
  bool conv_norm = false;
  double learning_rate = 0.0;
  int epochs = 0;
  double target_epsilon = 0.0;
  double delta = 0.0;
  std::string clip_bound = "3.0";

  std::vector<CLI::Option*> opts;
  CLI::Option* o_split = nullptr;
  CLI::Option* o_conv_widths = nullptr;
  CLI::Option* o_head_widths = nullptr;
  CLI::Option* o_pooling = nullptr;
  CLI::Option* o_dropout = nullptr;
  CLI::Option* o_input_norm = nullptr;
  CLI::Option* o_conv_norm = nullptr;
  CLI::Option* o_lr = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_target = nullptr;
  CLI::Option* o_delta = nullptr;
};

void AddDataOptions(CLI::App* app, RunFlags& f) {
  dpgnn::RunConfig& c = f.cfg;
  app->add_option("--dataset", c.dataset,
                  "synthetic, motif, or a TU directory / dataset JSON file")
      ->capture_default_str();
  app->add_option("--num-graphs", c.synthetic.num_graphs, "Synthetic graph count")
      ->capture_default_str();
  app->add_option("--nodes-per-graph", c.synthetic.nodes_per_graph)->capture_default_str();
  app->add_option("--num-features", c.synthetic.num_features)->capture_default_str();
  app->add_option("--class0-mean", c.synthetic.class0_mean)->capture_default_str();
  app->add_option("--class1-mean", c.synthetic.class1_mean)->capture_default_str();
  app->add_option("--feature-std", c.synthetic.feature_std)->capture_default_str();
  app->add_option("--p0", c.synthetic.p0, "Class-0 edge probability")->capture_default_str();
  app->add_option("--p1", c.synthetic.p1, "Class-1 edge probability")->capture_default_str();
  app->add_option("--motif-graphs", c.motif.num_graphs)->capture_default_str();
  app->add_option("--motif-base-nodes", c.motif.base_nodes)->capture_default_str();
  app->add_option("--motif-background-p", c.motif.background_p)->capture_default_str();
  app->add_option("--motif-size", c.motif.motif_size)->capture_default_str();
  app->add_option("--data-seed", f.data_seed, "Seed of the generated dataset")
      ->capture_default_str();
  f.o_split = app->add_option("--split", f.split, "train validation test sizes")
                  ->expected(3);
  app->add_option("--split-seed", c.split_seed)->capture_default_str();
}

void AddRunOptions(CLI::App* app, RunFlags& f) {
  AddDataOptions(app, f);
  dpgnn::RunConfig& c = f.cfg;
  app->add_option("--preset", c.preset,
                  "synthetic, scalability, fingerprint, ecg, molbace or motif")
      ->capture_default_str();
  app->add_option("--conv", f.conv, "gcn, gat or sage")->capture_default_str();
  f.o_conv_widths = app->add_option("--conv-widths", f.conv_widths);
  f.o_head_widths = app->add_option("--head-widths", f.head_widths);
  f.o_pooling = app->add_option("--pooling", f.pooling, "mean or max");
  f.o_dropout = app->add_option("--dropout-rate", f.dropout_rate);
  f.o_input_norm = app->add_option("--input-instance-norm", f.input_norm);
  f.o_conv_norm = app->add_option("--conv-instance-norm", f.conv_norm);
  app->add_option("--mode", f.mode, "sgd or dp-sgd")->capture_default_str();
  f.o_lr = app->add_option("--learning-rate,--lr", f.learning_rate);
  app->add_option("--batch-size", c.batch_size, "Default: the preset's batch size");
  f.o_epochs = app->add_option("--epochs", f.epochs);
  f.o_target = app->add_option("--target-epsilon", f.target_epsilon);
  app->add_option("--noise-multiplier", c.noise_multiplier)->capture_default_str();
  app->add_option("--clip-bound", f.clip_bound, "L2 clip bound, or inf")
      ->capture_default_str();
  f.o_delta = app->add_option("--delta", f.delta, "Default: 1 / dataset size");
  app->add_option("--n-seeds", c.n_seeds)->capture_default_str();
  app->add_option("--seed", c.seed, "First training seed")->capture_default_str();
  app->add_option("--output-dir,--out", c.output_dir)->capture_default_str();
}

dpgnn::RunConfig Resolve(RunFlags& f) {
  dpgnn::RunConfig c = f.cfg;
  c.synthetic.seed = f.data_seed;
  c.motif.seed = f.data_seed;
  if (f.o_split->count()) c.split = dpgnn::SplitSizes{f.split[0], f.split[1], f.split[2]};
  c.conv = dpgnn::ParseConvType(f.conv);
  c.mode = dpgnn::ParseTrainingMode(f.mode);
  if (f.o_conv_widths && f.o_conv_widths->count()) c.conv_widths = f.conv_widths;
  if (f.o_head_widths && f.o_head_widths->count()) c.head_widths = f.head_widths;
  if (f.o_pooling && f.o_pooling->count()) c.pooling = dpgnn::ParsePooling(f.pooling);
  if (f.o_dropout && f.o_dropout->count()) c.dropout_rate = f.dropout_rate;
  if (f.o_input_norm && f.o_input_norm->count()) c.input_instance_norm = f.input_norm;
  if (f.o_conv_norm && f.o_conv_norm->count()) c.conv_instance_norm = f.conv_norm;
  if (f.o_lr && f.o_lr->count()) c.learning_rate = f.learning_rate;
  if (f.o_epochs && f.o_epochs->count()) c.epochs = f.epochs;
  if (f.o_target && f.o_target->count()) c.target_epsilon = f.target_epsilon;
  if (f.o_delta && f.o_delta->count()) c.delta = f.delta;
  // from_chars accepts "inf".
  c.clip_bound = dpgnn::internal::ParseNumber<double>(f.clip_bound, "--clip-bound");
  dpgnn::ValidateRunConfig(c);
  return c;
}

void PrintSummary(const dpgnn::RunReport& r) {
  for (std::size_t k = 0; k < r.summary.size(); ++k) {
    std::cout << dpgnn::kScoreNames[k] << ": " << r.summary[k].mean << " +- "
              << r.summary[k].std << "\n";
  }
  if (r.plan.privacy) {
    std::cout << "epsilon: " << r.seeds.front().epsilon.value_or(0.0) << " at delta "
              << r.plan.privacy->delta << " after " << r.seeds.front().steps
              << " steps\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private graph classification"};
  app.require_subcommand(1);
  // Sections [train], [sweep], [explain] and [gen-data] hold each command's
  // options under their flag names.
  app.set_config("--config", "", "TOML/INI file with command options");
  app.fallthrough();

  RunFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "Train over several seeds and report");
  AddRunOptions(train, train_flags);

  RunFlags sweep_flags;
  std::string sweep_variable = "epsilon";
  std::vector<double> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "Repeat DP training over a value list");
  AddRunOptions(sweep, sweep_flags);
  sweep->add_option("--variable", sweep_variable, "epsilon or graph-size")
      ->capture_default_str();
  CLI::Option* o_values =
      sweep->add_option("--values", sweep_values, "Default: 1..10,15,20 or 10..50");

  RunFlags explain_flags;
  dpgnn::ExplainRequest explain_req;
  std::string optimizer = "adam";
  CLI::App* explain = app.add_subcommand("explain", "Compare two models' explanations");
  AddDataOptions(explain, explain_flags);
  explain->add_option("--checkpoint-a", explain_req.checkpoint_a)->required();
  explain->add_option("--checkpoint-b", explain_req.checkpoint_b)->required();
  explain->add_option("--n-samples", explain_req.n_samples)->capture_default_str();
  dpgnn::ExplainerConfig& ec = explain_req.explainer;
  explain->add_option("--iterations", ec.iterations)->capture_default_str();
  explain->add_option("--explainer-lr", ec.learning_rate)->capture_default_str();
  explain->add_option("--size-penalty", ec.size_penalty)->capture_default_str();
  explain->add_option("--entropy-penalty", ec.entropy_penalty)->capture_default_str();
  explain->add_option("--threshold", ec.threshold)->capture_default_str();
  explain->add_option("--optimizer", optimizer, "adam or sgd")->capture_default_str();
  explain->add_option("--explainer-seed", ec.seed)->capture_default_str();
  explain->add_option("--out", explain_req.output_path, "explain.json path")
      ->default_val("explain.json");

  dpgnn::GenDataRequest gen_req;
  std::uint64_t gen_seed = 0;
  std::string gen_format = "json";
  CLI::App* gen = app.add_subcommand("gen-data", "Generate a dataset file");
  gen->add_option("--kind", gen_req.kind, "synthetic or motif")->capture_default_str();
  gen->add_option("--num-graphs", gen_req.synthetic.num_graphs)->capture_default_str();
  gen->add_option("--nodes-per-graph", gen_req.synthetic.nodes_per_graph)
      ->capture_default_str();
  gen->add_option("--num-features", gen_req.synthetic.num_features)->capture_default_str();
  gen->add_option("--class0-mean", gen_req.synthetic.class0_mean)->capture_default_str();
  gen->add_option("--class1-mean", gen_req.synthetic.class1_mean)->capture_default_str();
  gen->add_option("--feature-std", gen_req.synthetic.feature_std)->capture_default_str();
  gen->add_option("--p0", gen_req.synthetic.p0)->capture_default_str();
  gen->add_option("--p1", gen_req.synthetic.p1)->capture_default_str();
  gen->add_option("--motif-graphs", gen_req.motif.num_graphs)->capture_default_str();
  gen->add_option("--motif-base-nodes", gen_req.motif.base_nodes)->capture_default_str();
  gen->add_option("--motif-background-p", gen_req.motif.background_p)
      ->capture_default_str();
  gen->add_option("--motif-size", gen_req.motif.motif_size)->capture_default_str();
  gen->add_option("--data-seed", gen_seed)->capture_default_str();
  gen->add_option("--format", gen_format, "json or tu")->capture_default_str();
  gen->add_option("--out", gen_req.out_path, "Output file (json) or directory (tu)")
      ->required();
  gen->add_flag("--force", gen_req.force, "Overwrite a non-empty output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      const dpgnn::RunConfig cfg = Resolve(train_flags);
      const dpgnn::RunReport r = dpgnn::CmdTrain(cfg, {true, &std::cerr});
      PrintSummary(r);
    } else if (*sweep) {
      const dpgnn::RunConfig cfg = Resolve(sweep_flags);
      const auto variable = dpgnn::ParseSweepVariable(sweep_variable);
      if (o_values->count() == 0) sweep_values = dpgnn::DefaultSweepValues(variable);
      const auto rows = dpgnn::CmdSweep(cfg, variable, sweep_values, {false, &std::cerr});
      std::cout << dpgnn::SweepCsv(variable, rows);
    } else if (*explain) {
      explain_req.data = Resolve(explain_flags);
      if (optimizer == "adam") {
        ec.optimizer = dpgnn::MaskOptimizer::kAdam;
      } else if (optimizer == "sgd") {
        ec.optimizer = dpgnn::MaskOptimizer::kGradientDescent;
      } else {
        throw dpgnn::InvalidArgument("unknown optimizer: " + optimizer);
      }
      const auto result = dpgnn::CmdExplain(explain_req);
      std::cout << "mean IoU(original, a): " << result.report.mean_original_a << "\n"
                << "mean IoU(original, b): " << result.report.mean_original_b << "\n"
                << "mean IoU(a, b): " << result.report.mean_a_b << "\n";
    } else if (*gen) {
      gen_req.synthetic.seed = gen_seed;
      gen_req.motif.seed = gen_seed;
      if (gen_format == "json") {
        gen_req.format = dpgnn::DataFormat::kJson;
      } else if (gen_format == "tu") {
        gen_req.format = dpgnn::DataFormat::kTu;
      } else {
        throw dpgnn::InvalidArgument("unknown format: " + gen_format);
      }
      std::cout << dpgnn::CmdGenData(gen_req) << "\n";
    }
  } catch (const dpgnn::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
