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

#include "strata/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strata/errors.hpp"

namespace strata {
namespace {

void accumulate(Tensor& into, const Tensor& g) {
  auto dst = into.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw UsageError(std::string(op) + ": operands are not on the same tape");
  }
  return *a.tape();
}

Tape& tape_of(Var a, const char* op) {
  if (a.tape() == nullptr) throw UsageError(std::string(op) + ": variable is not on a tape");
  return *a.tape();
}

void check_probs(const Tensor& p, const char* op) {
  if (p.rank() != 2) throw DimensionError(std::string(op) + ": expected [B x K], got " + p.shape_string());
  if (p.rows() == 0) throw UsageError(std::string(op) + ": empty batch");
}

}  // namespace

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw UsageError("Var::value: variable is not on a tape");
  return tape_->value(id_);
}

const Tensor& Gradients::operator[](ParamId id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) throw UsageError("gradients: unknown parameter " + std::to_string(id));
  return it->second;
}

Var Tape::constant(Tensor value) { return record(Op::kConstant, {}, std::move(value)); }

Var Tape::parameter(ParamId id, Tensor value) {
  if (params_.count(id)) throw UsageError("tape: parameter " + std::to_string(id) + " registered twice");
  Var v = record(Op::kParameter, {}, std::move(value));
  nodes_.back().param = id;
  params_.emplace(id, v.id());
  return v;
}

Var Tape::record(Op op, std::initializer_list<Var> parents, Tensor value, double scalar,
                 std::vector<int> labels) {
  Node node{op, {}, 0, std::move(value), scalar, std::move(labels), std::nullopt};
  for (Var p : parents) {
    check_owned(p);
    node.parents[node.parent_count++] = p.id();
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) throw UsageError("tape: variable belongs to another tape");
}

std::span<const std::size_t> Tape::parents(std::size_t node) const {
  const Node& n = nodes_.at(node);
  return std::span<const std::size_t>(n.parents.data(), n.parent_count);
}

Gradients Tape::backward(Var root) {
  check_owned(root);
  if (nodes_[root.id()].value.size() != 1) {
    throw UsageError("backward: root must be a scalar, got shape " + nodes_[root.id()].value.shape_string());
  }
  adjoints_.clear();
  adjoints_.reserve(nodes_.size());
  for (const Node& n : nodes_) adjoints_.emplace_back(n.value.shape());
  adjoints_[root.id()][0] = 1.0;

  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.parent_count == 0) continue;
    propagate(n, adjoints_[i]);
  }

  Gradients out;
  for (const auto& [id, node] : params_) out.set(id, adjoints_[node]);
  return out;
}

void Tape::propagate(const Node& n, const Tensor& g) {
  const std::size_t p0 = n.parents[0];
  const std::size_t p1 = n.parents[1];
  switch (n.op) {
    case Op::kConstant:
    case Op::kParameter:
      break;
    case Op::kMatmul: {
      accumulate(adjoints_[p0], matmul_nt(g, nodes_[p1].value));
      accumulate(adjoints_[p1], matmul_tn(nodes_[p0].value, g));
      break;
    }
    case Op::kAddRow: {
      accumulate(adjoints_[p0], g);
      auto db = adjoints_[p1].values();
      const std::size_t cols = g.cols();
      auto gv = g.values();
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) db[c] += gv[r * cols + c];
      }
      break;
    }
    case Op::kTanh: {
      auto dx = adjoints_[p0].values();
      auto y = n.value.values();
      auto gv = g.values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gv[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::kSoftmax: {
      auto dx = adjoints_[p0].values();
      auto y = n.value.values();
      auto gv = g.values();
      const std::size_t k = n.value.cols();
      for (std::size_t r = 0; r < n.value.rows(); ++r) {
        const std::size_t base = r * k;
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += gv[base + j] * y[base + j];
        for (std::size_t j = 0; j < k; ++j) dx[base + j] += y[base + j] * (gv[base + j] - dot);
      }
      break;
    }
    case Op::kCrossEntropy: {
      const Tensor& p = nodes_[p0].value;
      auto dp = adjoints_[p0].values();
      const double coef = g[0] / static_cast<double>(p.rows());
      for (std::size_t r = 0; r < p.rows(); ++r) {
        const double pr = p.at(r, n.labels[r]);
        // Clamped entries have zero slope.
        if (pr > kProbFloor) dp[r * p.cols() + n.labels[r]] -= coef / pr;
      }
      break;
    }
    case Op::kMeanEntropy: {
      const Tensor& p = nodes_[p0].value;
      auto dp = adjoints_[p0].values();
      auto pv = p.values();
      const double coef = g[0] / static_cast<double>(p.rows());
      for (std::size_t i = 0; i < pv.size(); ++i) {
        const double d = pv[i] > kProbFloor ? std::log(pv[i]) + 1.0 : std::log(kProbFloor);
        dp[i] -= coef * d;
      }
      break;
    }
    case Op::kScale: {
      auto dx = adjoints_[p0].values();
      auto gv = g.values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += n.scalar * gv[i];
      break;
    }
    case Op::kAdd:
      accumulate(adjoints_[p0], g);
      accumulate(adjoints_[p1], g);
      break;
    case Op::kSum: {
      const double gs = g[0];
      for (double& d : adjoints_[p0].values()) d += gs;
      break;
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  return t.record(Tape::Op::kMatmul, {a, b}, strata::matmul(a.value(), b.value()));
}

Var add_row(Var x, Var bias) {
  Tape& t = same_tape(x, bias, "add_row");
  return t.record(Tape::Op::kAddRow, {x, bias}, strata::add_row(x.value(), bias.value()));
}

Var tanh(Var x) {
  Tape& t = tape_of(x, "tanh");
  return t.record(Tape::Op::kTanh, {x}, strata::tanh(x.value()));
}

Var softmax(Var logits) {
  Tape& t = tape_of(logits, "softmax");
  return t.record(Tape::Op::kSoftmax, {logits}, strata::softmax(logits.value()));
}

Var cross_entropy(Var probs, std::span<const int> labels) {
  Tape& t = tape_of(probs, "cross_entropy");
  const Tensor& p = probs.value();
  check_probs(p, "cross_entropy");
  if (labels.size() != p.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(p.rows()));
  }
  const auto k = static_cast<int>(p.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    if (labels[r] < 0 || labels[r] >= k) {
      throw InputError("cross_entropy: label " + std::to_string(labels[r]) + " outside [0, " +
                       std::to_string(k) + ")");
    }
    total -= std::log(std::max(p.at(r, labels[r]), kProbFloor));
  }
  return t.record(Tape::Op::kCrossEntropy, {probs}, Tensor::scalar(total / static_cast<double>(p.rows())),
                  0.0, std::vector<int>(labels.begin(), labels.end()));
}

Var mean_entropy(Var probs) {
  Tape& t = tape_of(probs, "mean_entropy");
  const Tensor& p = probs.value();
  check_probs(p, "mean_entropy");
  double total = 0.0;
  for (double v : p.values()) total -= v * std::log(std::max(v, kProbFloor));
  return t.record(Tape::Op::kMeanEntropy, {probs}, Tensor::scalar(total / static_cast<double>(p.rows())));
}

Var scale(Var x, double c) {
  Tape& t = tape_of(x, "scale");
  Tensor v = x.value();
  for (double& e : v.values()) e *= c;
  return t.record(Tape::Op::kScale, {x}, std::move(v), c);
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  if (a.value().shape() != b.value().shape()) {
    throw DimensionError("add: incompatible shapes " + a.value().shape_string() + " and " +
                         b.value().shape_string());
  }
  Tensor v = a.value();
  auto dst = v.values();
  auto src = b.value().values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return t.record(Tape::Op::kAdd, {a, b}, std::move(v));
}

Var sum(Var x) {
  Tape& t = tape_of(x, "sum");
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return t.record(Tape::Op::kSum, {x}, Tensor::scalar(total));
}

}  // namespace strata
