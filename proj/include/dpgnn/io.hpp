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

// File formats: TU text datasets, the JSON dataset cache and JSON model
// checkpoints. Doubles are written with round-trip precision, so every
// format reloads bit-identical values.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dpgnn/datagen.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/model.hpp"

namespace dpgnn {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace internal {

inline std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(std::string_view field, const std::string& where) {
  field = Trim(field);
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw InvalidArgument("malformed number '" + std::string(field) + "' in " +
                          where);
  }
  return value;
}

template <typename T>
std::vector<T> ParseRow(std::string_view line, const std::string& where) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(ParseNumber<T>(line.substr(start, comma - start), where));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Non-empty lines of a text file.
inline std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!Trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

inline std::string FormatDouble(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace internal

// ---------------------------------------------------------------------------
// TU format
// ---------------------------------------------------------------------------

// Reads DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and the
// optional DS_node_attributes.txt from `dir`. Node and graph ids in the files
// are 1-based; nodes of a graph must be contiguous. Both directions of an
// edge collapse into one undirected edge; self-loops are dropped. Labels are
// remapped to 0..k-1 in sorted order. Without attributes every node gets the
// single feature 1.0.
inline Dataset LoadTuDataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw InvalidArgument("not a directory: " + dir.string());
  }
  std::string name;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() > 6 && file.ends_with("_A.txt")) {
      name = file.substr(0, file.size() - 6);
      break;
    }
  }
  if (name.empty()) throw InvalidArgument("no *_A.txt file in " + dir.string());
  const auto path = [&](const char* suffix) { return dir / (name + suffix); };

  const auto indicator_lines = internal::ReadLines(path("_graph_indicator.txt"));
  const auto num_nodes = indicator_lines.size();
  std::vector<int> node_graph(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    node_graph[i] = internal::ParseNumber<int>(indicator_lines[i],
                                               name + "_graph_indicator.txt");
  }
  const auto label_lines = internal::ReadLines(path("_graph_labels.txt"));
  const auto num_graphs = label_lines.size();
  std::vector<int> raw_labels(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    raw_labels[g] = internal::ParseNumber<int>(label_lines[g],
                                               name + "_graph_labels.txt");
  }
  // Graph ids must run 1..G in order, each owning a contiguous node block.
  std::vector<int> first_node(num_graphs + 1, -1);
  int expected = 1;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const int g = node_graph[i];
    if (g == expected) {
      first_node[static_cast<std::size_t>(g - 1)] = static_cast<int>(i);
      ++expected;
    } else if (g != expected - 1) {
      throw InvalidArgument("graph indicator is not contiguous at node " +
                            std::to_string(i + 1));
    }
  }
  if (static_cast<std::size_t>(expected - 1) != num_graphs) {
    throw InvalidArgument("graph indicator covers " + std::to_string(expected - 1) +
                          " graphs but there are " + std::to_string(num_graphs) +
                          " labels");
  }
  first_node[num_graphs] = static_cast<int>(num_nodes);

  Tensor attributes;
  if (fs::exists(path("_node_attributes.txt"))) {
    const auto lines = internal::ReadLines(path("_node_attributes.txt"));
    if (lines.size() != num_nodes) {
      throw InvalidArgument("node attribute count " + std::to_string(lines.size()) +
                            " does not match node count " +
                            std::to_string(num_nodes));
    }
    for (std::size_t i = 0; i < num_nodes; ++i) {
      const auto row = internal::ParseRow<double>(lines[i],
                                                  name + "_node_attributes.txt");
      if (i == 0) attributes.resize(static_cast<Eigen::Index>(num_nodes),
                                    static_cast<Eigen::Index>(row.size()));
      if (row.size() != static_cast<std::size_t>(attributes.cols())) {
        throw InvalidArgument("ragged node attribute row " + std::to_string(i + 1));
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        attributes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
  } else {
    attributes = Tensor::Ones(static_cast<Eigen::Index>(num_nodes), 1);
  }

  std::vector<std::set<Edge>> edges(num_graphs);
  for (const auto& line : internal::ReadLines(path("_A.txt"))) {
    const auto pair = internal::ParseRow<long long>(line, name + "_A.txt");
    if (pair.size() != 2) throw InvalidArgument("malformed edge line: " + line);
    for (long long id : pair) {
      if (id < 1 || id > static_cast<long long>(num_nodes)) {
        throw InvalidArgument("edge references unknown node " + std::to_string(id));
      }
    }
    const auto a = static_cast<std::size_t>(pair[0] - 1);
    const auto b = static_cast<std::size_t>(pair[1] - 1);
    if (node_graph[a] != node_graph[b]) {
      throw InvalidArgument("edge (" + std::to_string(pair[0]) + "," +
                            std::to_string(pair[1]) + ") crosses graphs");
    }
    if (a == b) continue;
    const auto g = static_cast<std::size_t>(node_graph[a] - 1);
    const int base = first_node[g];
    edges[g].insert(MakeEdge(static_cast<int>(a) - base, static_cast<int>(b) - base));
  }

  std::set<int> distinct(raw_labels.begin(), raw_labels.end());
  std::map<int, int> remap;
  for (int l : distinct) remap.emplace(l, static_cast<int>(remap.size()));

  Dataset d;
  d.name = name;
  d.source = "tu:" + dir.string();
  d.num_features = static_cast<int>(attributes.cols());
  d.num_classes = std::max(2, static_cast<int>(distinct.size()));
  for (std::size_t g = 0; g < num_graphs; ++g) {
    const int a = first_node[g];
    const int n = first_node[g + 1] - a;
    d.graphs.push_back(BuildGraph(attributes.middleRows(a, n),
                                  {edges[g].begin(), edges[g].end()},
                                  remap.at(raw_labels[g])));
  }
  return d;
}

// Writes `d` as DS_A.txt (both directions), DS_graph_indicator.txt,
// DS_graph_labels.txt and DS_node_attributes.txt under `dir`.
inline void WriteTuDataset(const Dataset& d, const fs::path& dir,
                           const std::string& name) {
  fs::create_directories(dir);
  const auto open = [&](const char* suffix) {
    std::ofstream out(dir / (name + suffix));
    if (!out) throw InvalidArgument("cannot write to " + dir.string());
    return out;
  };
  auto a = open("_A.txt");
  auto indicator = open("_graph_indicator.txt");
  auto labels = open("_graph_labels.txt");
  auto attrs = open("_node_attributes.txt");
  long long base = 1;
  for (std::size_t g = 0; g < d.graphs.size(); ++g) {
    const Graph& graph = d.graphs[g];
    for (const Edge& e : graph.edges()) {
      a << base + e.u << ", " << base + e.v << '\n';
      a << base + e.v << ", " << base + e.u << '\n';
    }
    for (int i = 0; i < graph.num_nodes(); ++i) {
      indicator << g + 1 << '\n';
      for (int c = 0; c < graph.num_features(); ++c) {
        if (c) attrs << ", ";
        attrs << internal::FormatDouble(graph.features()(i, c));
      }
      attrs << '\n';
    }
    labels << graph.label() << '\n';
    base += graph.num_nodes();
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline Json TensorToJson(const Tensor& t) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < t.size(); ++i) data.push_back(t.data()[i]);
  return {{"shape", {t.rows(), t.cols()}}, {"data", std::move(data)}};
}

inline Tensor TensorFromJson(const Json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto& data = j.at("data");
  internal::Require(static_cast<Eigen::Index>(data.size()) == rows * cols,
                    "tensor data length does not match its shape");
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t.data()[i] = data[static_cast<std::size_t>(i)].get<double>();
  }
  return t;
}

inline Json ToJson(const SyntheticSpec& s) {
  return {{"num_graphs", s.num_graphs},   {"nodes_per_graph", s.nodes_per_graph},
          {"num_features", s.num_features}, {"class0_mean", s.class0_mean},
          {"class1_mean", s.class1_mean}, {"feature_std", s.feature_std},
          {"p0", s.p0},                   {"p1", s.p1},
          {"seed", s.seed}};
}

inline Json ToJson(const MotifSpec& s) {
  return {{"num_graphs", s.num_graphs}, {"base_nodes", s.base_nodes},
          {"background_p", s.background_p}, {"motif_size", s.motif_size},
          {"seed", s.seed}};
}

inline Json ToJson(const ModelConfig& c) {
  return {{"conv_type", std::string(ToString(c.conv_type))},
          {"conv_widths", c.conv_widths},
          {"head_widths", c.head_widths},
          {"input_instance_norm", c.input_instance_norm},
          {"conv_instance_norm", c.conv_instance_norm},
          {"dropout_rate", c.dropout_rate},
          {"pooling", std::string(ToString(c.pooling))},
          {"num_classes", c.num_classes}};
}

inline ModelConfig ModelConfigFromJson(const Json& j) {
  ModelConfig c;
  c.conv_type = ParseConvType(j.at("conv_type").get<std::string>());
  c.conv_widths = j.at("conv_widths").get<std::vector<int>>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.input_instance_norm = j.at("input_instance_norm").get<bool>();
  c.conv_instance_norm = j.at("conv_instance_norm").get<bool>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.pooling = ParsePooling(j.at("pooling").get<std::string>());
  c.num_classes = j.at("num_classes").get<int>();
  ValidateModelConfig(c);
  return c;
}

// Dataset cache document. `generator` echoes the spec that produced it and
// `motif_edges`, when given, records planted ground truth per graph.
inline Json DatasetToJson(const Dataset& d, const Json& generator = Json(),
                          const std::vector<std::vector<Edge>>* motif_edges = nullptr) {
  Json graphs = Json::array();
  for (std::size_t g = 0; g < d.graphs.size(); ++g) {
    const Graph& graph = d.graphs[g];
    Json edges = Json::array();
    for (const Edge& e : graph.edges()) edges.push_back({e.u, e.v});
    Json entry = {{"label", graph.label()},
                  {"features", TensorToJson(graph.features())},
                  {"edges", std::move(edges)}};
    if (motif_edges) {
      Json m = Json::array();
      for (const Edge& e : (*motif_edges)[g]) m.push_back({e.u, e.v});
      entry["motif_edges"] = std::move(m);
    }
    graphs.push_back(std::move(entry));
  }
  return {{"format", "dpgnn-dataset"}, {"version", 1},
          {"name", d.name},            {"source", d.source},
          {"num_classes", d.num_classes}, {"num_features", d.num_features},
          {"generator", generator},    {"graphs", std::move(graphs)}};
}

inline Dataset DatasetFromJson(const Json& j,
                               std::vector<std::vector<Edge>>* motif_edges = nullptr) {
  internal::Require(j.value("format", "") == "dpgnn-dataset",
                    "not a dpgnn dataset document");
  Dataset d;
  d.name = j.value("name", "");
  d.source = j.value("source", "");
  d.num_classes = j.at("num_classes").get<int>();
  d.num_features = j.at("num_features").get<int>();
  for (const Json& g : j.at("graphs")) {
    std::vector<Edge> edges;
    for (const Json& e : g.at("edges")) {
      edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    d.graphs.push_back(BuildGraph(TensorFromJson(g.at("features")), std::move(edges),
                                  g.at("label").get<int>()));
    if (motif_edges) {
      std::vector<Edge> m;
      if (g.contains("motif_edges")) {
        for (const Json& e : g.at("motif_edges")) {
          m.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        }
      }
      motif_edges->push_back(std::move(m));
    }
  }
  ValidateDataset(d);
  return d;
}

inline Json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

// Writes to a sibling temporary and renames it into place.
inline void WriteTextFileAtomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidArgument("failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

inline void WriteJsonFile(const fs::path& path, const Json& j, int indent = -1) {
  WriteTextFileAtomic(path, j.dump(indent) + "\n");
}

inline Json CheckpointToJson(const Model& m) {
  Json tensors = Json::array();
  for (const auto& e : m.params.entries()) {
    Json t = TensorToJson(e.value);
    t["name"] = e.name;
    tensors.push_back(std::move(t));
  }
  return {{"format", "dpgnn-checkpoint"}, {"version", 1},
          {"model_config", ToJson(m.config)}, {"num_features", m.num_features},
          {"tensors", std::move(tensors)}};
}

inline Model CheckpointFromJson(const Json& j) {
  internal::Require(j.value("format", "") == "dpgnn-checkpoint",
                    "not a dpgnn checkpoint");
  const ModelConfig cfg = ModelConfigFromJson(j.at("model_config"));
  const int width = j.at("num_features").get<int>();
  // Build the layout from the config, then overwrite the values; this also
  // rejects checkpoints whose tensors do not fit the declared architecture.
  Model m = BuildModel(cfg, width, 0);
  const Json& tensors = j.at("tensors");
  internal::Require(tensors.size() == m.params.num_tensors(),
                    "checkpoint tensor count does not match its model config");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& entry = m.params.entries()[i];
    internal::Require(tensors[i].at("name").get<std::string>() == entry.name,
                      "checkpoint tensor order does not match its model config");
    Tensor t = TensorFromJson(tensors[i]);
    internal::Require(t.rows() == entry.value.rows() && t.cols() == entry.value.cols(),
                      "checkpoint tensor " + entry.name + " has the wrong shape");
    entry.value = std::move(t);
  }
  return m;
}

inline void SaveCheckpoint(const Model& m, const fs::path& path) {
  WriteJsonFile(path, CheckpointToJson(m));
}

inline Model LoadCheckpoint(const fs::path& path) {
  return CheckpointFromJson(ReadJsonFile(path));
}

}  // namespace dpgnn
