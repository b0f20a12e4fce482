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

// Layer-wise entropy regulation and performance-adaptive loss weighting.
//
// Every head ℓ contributes α_ℓ·CE_ℓ + γ_ℓ·H̄_ℓ to one scalar objective:
//
//   γ_ℓ = β·exp(tanh(z_ℓ)),   z_ℓ = (H̄_ℓ − mean H̄) / std H̄   (per mini-batch)
//   α_ℓ = exp(tanh(−s_ℓ)),    s_ℓ = (A_ℓ − mean A) / std A     (per task)
//
// Both standard deviations are population statistics over the L layers.
// γ and α are plain numbers as far as differentiation is concerned.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "strata/model.hpp"
#include "strata/tape.hpp"

namespace strata {

/// Below this spread all z-scores are reported as 0.
inline constexpr double kSigmaFloor = 1e-8;

struct ZScores {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> z;
};

/// Cross-layer standardisation. Needs at least two values.
ZScores layer_zscores(std::span<const double> values);

/// Mean per-row entropy in nats, -Σ p ln max(p, kProbFloor). Differentiable.
Var batch_entropy(Var probs);

struct EntropyStats {
  std::vector<double> mean_entropy;  // H̄_ℓ per layer
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> z;
};

EntropyStats entropy_stats(std::span<const double> mean_entropy);

/// γ_ℓ = β·exp(tanh(z_ℓ)). β must be nonnegative.
std::vector<double> entropy_scaling(const EntropyStats& stats, double beta);

/// Per-layer loss modulators derived from past-task accuracies.
struct ModulatorState {
  std::vector<double> alpha;
  std::vector<double> accuracies;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> score;

  /// α = 1 for every layer, as used before any past task exists.
  static ModulatorState neutral(std::size_t layers);
};

/// α_ℓ = exp(tanh(−s_ℓ)). Throws InputError for accuracies outside [0, 1].
ModulatorState accuracy_modulators(std::span<const double> accuracies);

enum class EntropySign {
  kPenalize,  // + γ·H̄ in the minimised loss
  kReward,    // − γ·H̄
};

std::string to_string(EntropySign sign);
EntropySign parse_entropy_sign(const std::string& text);

struct RegularizerOptions {
  double beta = 0.005;
  /// When false every γ_ℓ equals β.
  bool entropy_scaling = true;
  EntropySign sign = EntropySign::kPenalize;
};

struct CompositeLoss {
  Var total;
  EntropyStats entropy;
  std::vector<double> gamma;
  std::vector<double> layer_loss;  // cross-entropy of each head
};

/// Σ_ℓ α_ℓ·CE_ℓ ± γ_ℓ·H̄_ℓ over all heads of `record`.
CompositeLoss composite_loss(const ForwardRecord& record, std::span<const int> labels,
                             std::span<const double> alpha, const RegularizerOptions& options);

}  // namespace strata
