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

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpgnn/errors.hpp"

namespace dpgnn {

// Dense row-major matrix of doubles. Node-feature matrices keep one node per
// row so that a graph's block inside a batch is a contiguous row range.
using Tensor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool AllFinite(const Tensor& t) { return t.allFinite(); }

// Ordered collection of named parameter tensors. The order in which tensors
// are added defines the layout of the flattened vector view.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  void Add(std::string name, Tensor value) {
    for (const auto& e : entries_) {
      internal::Require(e.name != name, "duplicate parameter name: " + name);
    }
    size_ += static_cast<std::size_t>(value.size());
    entries_.push_back({std::move(name), std::move(value)});
  }

  std::size_t size() const { return size_; }
  std::size_t num_tensors() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  const Tensor& at(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.name == name) return e.value;
    }
    throw InvalidArgument("unknown parameter: " + name);
  }
  Tensor& at(const std::string& name) {
    return const_cast<Tensor&>(std::as_const(*this).at(name));
  }

  Vector Flatten() const {
    Vector out(static_cast<Eigen::Index>(size_));
    Eigen::Index offset = 0;
    for (const auto& e : entries_) {
      out.segment(offset, e.value.size()) =
          Eigen::Map<const Vector>(e.value.data(), e.value.size());
      offset += e.value.size();
    }
    return out;
  }

  void Unflatten(std::span<const double> flat) {
    internal::Require(flat.size() == size_,
                      "flat parameter vector has wrong length");
    std::size_t offset = 0;
    for (auto& e : entries_) {
      std::copy_n(flat.data() + offset, e.value.size(), e.value.data());
      offset += static_cast<std::size_t>(e.value.size());
    }
  }

  // Same names and shapes, in the same order.
  bool SameLayout(const ParameterSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& a = entries_[i];
      const auto& b = other.entries_[i];
      if (a.name != b.name || a.value.rows() != b.value.rows() ||
          a.value.cols() != b.value.cols()) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::size_t size_ = 0;
};

}  // namespace dpgnn
