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

// Minimal tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every intermediate value together with a closure that maps
// the value's gradient onto the gradients of its inputs. Backward() walks the
// tape in reverse. Nodes whose inputs never require a gradient are recorded
// without a closure, so constant inputs (node features, frozen parameters)
// cost nothing on the way back.

#include <cassert>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "dpgnn/errors.hpp"
#include "dpgnn/tensor.hpp"

namespace dpgnn::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient accumulated by the last Backward(); zero-sized if none reached.
  const Tensor& grad() const;
  bool requires_grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor&)>;

  Tape() { nodes_.reserve(64); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Leaf(Tensor value, bool requires_grad) {
    nodes_.push_back({std::move(value), Tensor(), requires_grad, nullptr, nullptr});
    return Var(this, nodes_.size() - 1);
  }
  Var Constant(Tensor value) { return Leaf(std::move(value), false); }

  // Leaf that aliases `value` instead of copying it. `value` must outlive
  // every use of the tape.
  Var View(const Tensor& value, bool requires_grad) {
    nodes_.push_back({Tensor(), Tensor(), requires_grad, nullptr, &value});
    return Var(this, nodes_.size() - 1);
  }

  // Records an op output. `backward` is dropped if no input needs a gradient.
  Var Record(Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward) {
    bool needs = false;
    for (const Var& v : inputs) needs = needs || requires_grad(v);
    nodes_.push_back({std::move(value), Tensor(), needs,
                      needs ? std::move(backward) : nullptr, nullptr});
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(Var v) const { return node(v).get(); }
  const Tensor& grad(Var v) const { return node(v).grad; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Gradient buffer of `v`, zero-initialised on first use.
  Tensor& GradBuffer(Var v) {
    Node& n = node(v);
    if (n.grad.size() == 0) n.grad.setZero(n.get().rows(), n.get().cols());
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every node.
  void Backward(Var root) {
    internal::Require(value(root).size() == 1, "Backward root must be scalar");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    GradBuffer(root).setConstant(1.0);
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    const Tensor* external = nullptr;

    const Tensor& get() const { return external ? *external : value; }
  };

  Node& node(Var v) {
    assert(v.tape_ == this && v.id_ < nodes_.size());
    return nodes_[v.id_];
  }
  const Node& node(Var v) const {
    assert(v.tape_ == this && v.id_ < nodes_.size());
    return nodes_[v.id_];
  }

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }
inline const Tensor& Var::grad() const { return tape_->grad(*this); }
inline bool Var::requires_grad() const { return tape_->requires_grad(*this); }

// ---------------------------------------------------------------------------
// Dense ops
// ---------------------------------------------------------------------------

inline Var MatMul(Var a, Var b) {
  internal::Require(a.cols() == b.rows(), "MatMul shape mismatch");
  Tensor out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return a.tape()->Record(std::move(out), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            if (a.requires_grad()) {
                              t.GradBuffer(a).noalias() +=
                                  g * b.value().transpose();
                            }
                            if (b.requires_grad()) {
                              t.GradBuffer(b).noalias() +=
                                  a.value().transpose() * g;
                            }
                          });
}

inline Var Add(Var a, Var b) {
  internal::Require(a.rows() == b.rows() && a.cols() == b.cols(),
                    "Add shape mismatch");
  Tensor out = a.value() + b.value();
  return a.tape()->Record(std::move(out), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            if (a.requires_grad()) t.GradBuffer(a) += g;
                            if (b.requires_grad()) t.GradBuffer(b) += g;
                          });
}

// x (n x c) + bias (1 x c) broadcast over rows.
inline Var AddRowVector(Var x, Var bias) {
  internal::Require(bias.rows() == 1 && bias.cols() == x.cols(),
                    "AddRowVector shape mismatch");
  Tensor out = x.value();
  out.rowwise() += bias.value().row(0);
  return x.tape()->Record(std::move(out), {x, bias},
                          [x, bias](Tape& t, const Tensor& g) {
                            if (x.requires_grad()) t.GradBuffer(x) += g;
                            if (bias.requires_grad()) {
                              t.GradBuffer(bias) += g.colwise().sum();
                            }
                          });
}

inline Var Relu(Var x) {
  Tensor out = x.value().cwiseMax(0.0);
  return x.tape()->Record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    t.GradBuffer(x) += (x.value().array() > 0.0).select(g, 0.0);
  });
}

// Inverted dropout: kept entries are scaled by 1/(1-rate).
template <typename Rng>
Var Dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  internal::Require(rate < 1.0, "dropout rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor scale(x.rows(), x.cols());
  const double s = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    scale.data()[i] = keep(rng) ? s : 0.0;
  }
  Tensor out = x.value().cwiseProduct(scale);
  return x.tape()->Record(std::move(out), {x},
                          [x, scale = std::move(scale)](Tape& t,
                                                        const Tensor& g) {
                            t.GradBuffer(x) += g.cwiseProduct(scale);
                          });
}

}  // namespace dpgnn::ad
