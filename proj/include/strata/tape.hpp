// Copyright 2026 The Strata Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over whole tensors.
//
// A Tape records primitive operations in execution order, so every node's
// parents precede it. backward() walks the nodes in reverse and accumulates
// adjoints, then gathers the adjoints of parameter leaves into a Gradients
// map keyed by ParamId.
//
//   Tape tape;
//   Var w = tape.parameter(0, weights);
//   Var loss = sum(tanh(matmul(tape.constant(x), w)));
//   Gradients g = tape.backward(loss);   // g[0] has the shape of weights

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "strata/tensor.hpp"

namespace strata {

using ParamId = std::size_t;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Parameter gradients produced by Tape::backward.
class Gradients {
 public:
  /// Gradient for `id`; throws UsageError if the parameter was never registered.
  const Tensor& operator[](ParamId id) const;
  bool contains(ParamId id) const { return grads_.count(id) != 0; }
  std::size_t size() const noexcept { return grads_.size(); }

  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

  void set(ParamId id, Tensor g) { grads_.insert_or_assign(id, std::move(g)); }

 private:
  std::map<ParamId, Tensor> grads_;
};

class Tape {
 public:
  enum class Op : std::uint8_t {
    kConstant,
    kParameter,
    kMatmul,
    kAddRow,
    kTanh,
    kSoftmax,
    kCrossEntropy,
    kMeanEntropy,
    kScale,
    kAdd,
    kSum,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf whose gradient is reported under `id`. Registering the same id
  /// twice is a UsageError.
  Var parameter(ParamId id, Tensor value);

  /// Reverse sweep from a scalar root. Every registered parameter gets an
  /// entry, zero if the root does not depend on it.
  Gradients backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::size_t node) const { return nodes_.at(node).value; }
  /// Adjoint from the most recent backward(); empty tensor before that.
  const Tensor& adjoint(std::size_t node) const { return adjoints_.at(node); }
  std::span<const std::size_t> parents(std::size_t node) const;
  Op op(std::size_t node) const { return nodes_.at(node).op; }

  // Used by the differentiable operations below.
  Var record(Op op, std::initializer_list<Var> parents, Tensor value, double scalar = 0.0,
             std::vector<int> labels = {});

 private:
  struct Node {
    Op op;
    std::array<std::size_t, 2> parents{};
    std::size_t parent_count = 0;
    Tensor value;
    double scalar = 0.0;
    std::vector<int> labels;
    std::optional<ParamId> param;
  };

  void propagate(const Node& node, const Tensor& grad);
  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;
  std::map<ParamId, std::size_t> params_;
};

// Differentiable operations. Operands must live on the same tape.

Var matmul(Var a, Var b);
/// x[B×n] + bias[1×n]; the only broadcast supported.
Var add_row(Var x, Var bias);
Var tanh(Var x);
Var softmax(Var logits);
/// Mean over rows of -ln(max(p[label], kProbFloor)). Throws InputError for
/// labels outside [0, K) and UsageError for an empty batch.
Var cross_entropy(Var probs, std::span<const int> labels);
/// Mean over rows of -Σ p ln(max(p, kProbFloor)). Empty batch is a UsageError.
Var mean_entropy(Var probs);
/// c·x with c treated as a constant.
Var scale(Var x, double c);
/// Elementwise a + b of identical shapes.
Var add(Var a, Var b);
/// Sum of all entries, as a scalar.
Var sum(Var x);

}  // namespace strata
