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

#include <span>
#include <vector>

#include "strata/tensor.hpp"

namespace strata {

/// One labelled input. `label` is a global class index; `task` is 1-based.
struct Example {
  std::vector<double> x;
  int label = 0;
  int task = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Stacks inputs into a [B × D] matrix. `dim` is used when `examples` is empty.
Tensor stack_inputs(std::span<const Example> examples, std::size_t dim);
std::vector<int> labels_of(std::span<const Example> examples);

}  // namespace strata
