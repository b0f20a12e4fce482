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

#include "strata/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "strata/errors.hpp"

namespace strata {

std::vector<Tensor> finite_difference_gradient(const Objective& f, std::vector<Tensor> params, double step) {
  if (!(step > 0.0)) throw UsageError("finite_difference_gradient: step must be positive");
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (auto& p : params) grads.emplace_back(p.shape());

  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = f(params);
      values[i] = saved - step;
      const double down = f(params);
      values[i] = saved;
      grads[t][i] = (up - down) / (2.0 * step);
    }
  }
  return grads;
}

double max_relative_error(const Tensor& analytic, const Tensor& numeric, double floor) {
  if (analytic.shape() != numeric.shape()) {
    throw DimensionError("max_relative_error: shapes " + analytic.shape_string() + " and " +
                         numeric.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

}  // namespace strata
