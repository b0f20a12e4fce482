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

#include "strata/data.hpp"

#include "strata/errors.hpp"

namespace strata {

Tensor stack_inputs(std::span<const Example> examples, std::size_t dim) {
  std::vector<double> data;
  data.reserve(examples.size() * dim);
  for (const Example& e : examples) {
    if (e.x.size() != dim) {
      throw DimensionError("stack_inputs: example of width " + std::to_string(e.x.size()) + ", expected " +
                           std::to_string(dim));
    }
    data.insert(data.end(), e.x.begin(), e.x.end());
  }
  return Tensor({examples.size(), dim}, std::move(data));
}

std::vector<int> labels_of(std::span<const Example> examples) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const Example& e : examples) out.push_back(e.label);
  return out;
}

}  // namespace strata
