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
#include <filesystem>
#include <string>
#include <vector>

#include "strata/tape.hpp"
#include "strata/tensor.hpp"

namespace strata {

/// Multi-layer tanh perceptron in which every block feeds its own linear
/// classification head over the shared label space.
///
/// Parameters are stored flat in a fixed order: blocks first, then heads,
/// each as weight [in × out] followed by bias [1 × out]. That order is also
/// the ParamId order on the tape and the checkpoint layout.
class LayeredNet {
 public:
  /// Fan-scaled uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
  static LayeredNet init(std::size_t input_dim, std::vector<std::size_t> widths, std::size_t classes,
                         std::uint64_t seed);

  /// Adopts `params` after checking their shapes against the architecture.
  LayeredNet(std::size_t input_dim, std::vector<std::size_t> widths, std::size_t classes,
             std::vector<Tensor> params);

  std::size_t input_dim() const noexcept { return input_dim_; }
  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t layers() const noexcept { return widths_.size(); }

  std::vector<Tensor>& parameters() noexcept { return params_; }
  const std::vector<Tensor>& parameters() const noexcept { return params_; }
  std::vector<std::string> parameter_names() const;

  ParamId block_weight(std::size_t layer) const { return 2 * layer; }
  ParamId block_bias(std::size_t layer) const { return 2 * layer + 1; }
  ParamId head_weight(std::size_t layer) const { return 2 * layers() + 2 * layer; }
  ParamId head_bias(std::size_t layer) const { return 2 * layers() + 2 * layer + 1; }

  friend bool operator==(const LayeredNet&, const LayeredNet&) = default;

 private:
  static std::vector<Shape> expected_shapes(std::size_t input_dim, const std::vector<std::size_t>& widths,
                                            std::size_t classes);

  std::size_t input_dim_;
  std::vector<std::size_t> widths_;
  std::size_t classes_;
  std::vector<Tensor> params_;
};

/// Per-layer tape handles for one forward pass.
struct ForwardRecord {
  std::vector<Var> activations;
  std::vector<Var> logits;
  std::vector<Var> probs;
};

/// Differentiable forward pass; every parameter is registered on `tape`
/// under its flat index.
ForwardRecord forward(Tape& tape, const LayeredNet& net, const Tensor& x);

/// Tape-free forward pass returning the logits of every head.
std::vector<Tensor> layer_logits(const LayeredNet& net, const Tensor& x);

/// Argmax of head `layer` (0-based) per row, ties to the lowest class.
std::vector<int> predict_layer(const LayeredNet& net, const Tensor& x, std::size_t layer);

/// Writes a JSON header line followed by the parameters as little-endian
/// 64-bit floats in flat order.
void save_checkpoint(const LayeredNet& net, const std::filesystem::path& path);
LayeredNet load_checkpoint(const std::filesystem::path& path);

}  // namespace strata
