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


// Hand-rolled generators and small helpers shared by the test binaries.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "strata/model.hpp"
#include "strata/regulator.hpp"
#include "strata/rng.hpp"
#include "strata/stream.hpp"
#include "strata/tensor.hpp"

namespace strata::testing {

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Tensor t(Shape{rows, cols});
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<int> out(n);
  for (int& l : out) l = static_cast<int>(rng.uniform_int(0, classes - 1));
  return out;
}

/// A net whose parameters are all Gaussian, so no bias starts at zero.
/// Weights have std scale/sqrt(fan_in); biases have std 0.1·scale.
inline LayeredNet random_net(Rng& rng, std::size_t input_dim, const std::vector<std::size_t>& widths,
                             std::size_t classes, double scale = 1.0) {
  LayeredNet net = LayeredNet::init(input_dim, widths, classes, rng.uniform_int(0, 1u << 30));
  for (Tensor& p : net.parameters()) {
    const double std = p.rows() == 1 ? 0.1 * scale : scale / std::sqrt(static_cast<double>(p.rows()));
    for (double& v : p.values()) v = std * rng.normal();
  }
  return net;
}

/// Evaluates Σ α CE + sign·γ H̄ with γ supplied, so finite differences see
/// the same constants the tape treated as fixed.
inline double fixed_modulator_loss(const LayeredNet& net, const Tensor& x, const std::vector<int>& labels,
                                   const std::vector<double>& alpha, const std::vector<double>& gamma,
                                   double sign) {
  Tape tape;
  const ForwardRecord rec = forward(tape, net, x);
  double total = 0.0;
  for (std::size_t l = 0; l < rec.probs.size(); ++l) {
    total += alpha[l] * cross_entropy(rec.probs[l], labels).value().item() +
             sign * gamma[l] * mean_entropy(rec.probs[l]).value().item();
  }
  return total;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("strata_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// A small two-class-per-task stream for fast trainer tests.
inline StreamConfig small_stream(std::uint64_t seed) {
  StreamConfig cfg;
  cfg.num_tasks = 3;
  cfg.classes_per_task = 2;
  cfg.examples_per_class = 50;
  cfg.input_dim = 8;
  cfg.seed = seed;
  return cfg;
}

}  // namespace strata::testing
