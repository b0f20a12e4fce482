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

#include <functional>
#include <vector>

#include "strata/tensor.hpp"

namespace strata {

/// Scalar objective over a list of parameter tensors.
using Objective = std::function<double(const std::vector<Tensor>&)>;

/// Central differences (f(θ + h·e_i) − f(θ − h·e_i)) / 2h for every entry of
/// every parameter. Independent of the tape; used as the gradient oracle.
std::vector<Tensor> finite_difference_gradient(const Objective& f, std::vector<Tensor> params, double step);

/// |a − b| / max(|a|, |b|, floor), maximised over entries.
double max_relative_error(const Tensor& analytic, const Tensor& numeric, double floor = 1e-6);

}  // namespace strata
