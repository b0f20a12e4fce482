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

#include "strata/optimizer.hpp"

#include <cmath>

#include "strata/errors.hpp"

namespace strata {
namespace {

const Tensor& grad_for(const Gradients& grads, std::size_t i, const Tensor& param) {
  const Tensor& g = grads[i];
  if (g.shape() != param.shape()) {
    throw DimensionError("optimizer: gradient " + g.shape_string() + " for parameter " + param.shape_string());
  }
  return g;
}

}  // namespace

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kAdam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("optimizer must be 'adam' or 'sgd', got '" + text + "'");
}

AdamMoments AdamMoments::zeros_like(const std::vector<Tensor>& params) {
  AdamMoments m;
  for (const Tensor& p : params) {
    m.first.emplace_back(p.shape());
    m.second.emplace_back(p.shape());
  }
  return m;
}

void adam_step(std::vector<Tensor>& params, const Gradients& grads, AdamMoments& moments,
               const OptimizerOptions& o) {
  if (moments.first.size() != params.size()) throw DimensionError("adam_step: moments do not match parameters");
  ++moments.step;
  const double t = static_cast<double>(moments.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  const double shrink = 1.0 - o.lr * o.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto g = grad_for(grads, i, params[i]).values();
    auto m = moments.first[i].values();
    auto v = moments.second[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] *= shrink;
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

void sgd_step(std::vector<Tensor>& params, const Gradients& grads, const OptimizerOptions& o) {
  const double shrink = 1.0 - o.lr * o.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto g = grad_for(grads, i, params[i]).values();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = p[j] * shrink - o.lr * g[j];
  }
}

}  // namespace strata
