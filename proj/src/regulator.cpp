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

#include "strata/regulator.hpp"

#include <cmath>

#include "strata/errors.hpp"

namespace strata {

ZScores layer_zscores(std::span<const double> values) {
  if (values.size() < 2) {
    throw UsageError("layer_zscores: need at least 2 layers, got " + std::to_string(values.size()));
  }
  const double n = static_cast<double>(values.size());
  ZScores out;
  for (double v : values) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / n);
  out.z.assign(values.size(), 0.0);
  if (out.stddev >= kSigmaFloor) {
    for (std::size_t i = 0; i < values.size(); ++i) out.z[i] = (values[i] - out.mean) / out.stddev;
  }
  return out;
}

Var batch_entropy(Var probs) { return mean_entropy(probs); }

EntropyStats entropy_stats(std::span<const double> mean_entropy) {
  ZScores zs = layer_zscores(mean_entropy);
  return EntropyStats{{mean_entropy.begin(), mean_entropy.end()}, zs.mean, zs.stddev, std::move(zs.z)};
}

std::vector<double> entropy_scaling(const EntropyStats& stats, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("entropy_scaling: beta must be nonnegative");
  std::vector<double> gamma;
  gamma.reserve(stats.z.size());
  for (double z : stats.z) gamma.push_back(beta * std::exp(std::tanh(z)));
  return gamma;
}

ModulatorState ModulatorState::neutral(std::size_t layers) {
  ModulatorState s;
  s.alpha.assign(layers, 1.0);
  s.score.assign(layers, 0.0);
  return s;
}

ModulatorState accuracy_modulators(std::span<const double> accuracies) {
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("accuracy_modulators: accuracy " + std::to_string(a) + " outside [0, 1]");
  }
  ZScores zs = layer_zscores(accuracies);
  ModulatorState s;
  s.accuracies.assign(accuracies.begin(), accuracies.end());
  s.mu = zs.mean;
  s.sigma = zs.stddev;
  s.score = std::move(zs.z);
  for (double score : s.score) s.alpha.push_back(std::exp(std::tanh(-score)));
  return s;
}

std::string to_string(EntropySign sign) { return sign == EntropySign::kPenalize ? "penalize" : "reward"; }

EntropySign parse_entropy_sign(const std::string& text) {
  if (text == "penalize") return EntropySign::kPenalize;
  if (text == "reward") return EntropySign::kReward;
  throw ConfigError("entropy sign must be 'penalize' or 'reward', got '" + text + "'");
}

CompositeLoss composite_loss(const ForwardRecord& record, std::span<const int> labels,
                             std::span<const double> alpha, const RegularizerOptions& options) {
  const std::size_t layers = record.probs.size();
  if (alpha.size() != layers) {
    throw DimensionError("composite_loss: " + std::to_string(alpha.size()) + " modulators for " +
                         std::to_string(layers) + " layers");
  }
  if (layers == 0) throw UsageError("composite_loss: empty forward record");

  std::vector<Var> ce, ent;
  CompositeLoss out;
  std::vector<double> h;
  for (Var p : record.probs) {
    ce.push_back(cross_entropy(p, labels));
    ent.push_back(batch_entropy(p));
    out.layer_loss.push_back(ce.back().value().item());
    h.push_back(ent.back().value().item());
  }
  out.entropy = entropy_stats(h);
  if (options.entropy_scaling) {
    out.gamma = entropy_scaling(out.entropy, options.beta);
  } else {
    if (!(options.beta >= 0.0)) throw ConfigError("composite_loss: beta must be nonnegative");
    out.gamma.assign(layers, options.beta);
  }
  const double sign = options.sign == EntropySign::kPenalize ? 1.0 : -1.0;

  Var total;
  for (std::size_t l = 0; l < layers; ++l) {
    Var term = add(scale(ce[l], alpha[l]), scale(ent[l], sign * out.gamma[l]));
    total = l == 0 ? term : add(total, term);
  }
  out.total = total;
  return out;
}

}  // namespace strata
