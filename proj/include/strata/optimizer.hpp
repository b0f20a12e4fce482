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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strata/tape.hpp"
#include "strata/tensor.hpp"

namespace strata {

enum class OptimizerKind { kAdam, kSgd };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

struct OptimizerOptions {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::uint64_t step = 0;

  static AdamMoments zeros_like(const std::vector<Tensor>& params);
};

/// Decoupled decay θ ← θ·(1 − lr·wd), then a bias-corrected Adam update.
/// Gradients are looked up by flat parameter index.
void adam_step(std::vector<Tensor>& params, const Gradients& grads, AdamMoments& moments,
               const OptimizerOptions& options);

/// Decoupled decay followed by θ ← θ − lr·g.
void sgd_step(std::vector<Tensor>& params, const Gradients& grads, const OptimizerOptions& options);

}  // namespace strata
