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

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace strata {

/// a[t][s]: accuracy on task s after training through task t, defined for
/// s ≤ t. Indices are 0-based here; the CSV form is 1-based.
class AccuracyMatrix {
 public:
  explicit AccuracyMatrix(std::size_t tasks);

  std::size_t tasks() const noexcept { return tasks_; }
  void set(std::size_t t, std::size_t s, double value);
  double at(std::size_t t, std::size_t s) const;
  bool defined(std::size_t t, std::size_t s) const;
  bool complete() const;

  /// Header `t,s,accuracy`, one row per defined entry.
  std::string to_csv() const;
  static AccuracyMatrix from_csv(const std::string& text);

 private:
  std::size_t tasks_;
  std::vector<std::optional<double>> cells_;
};

/// Mean of the last row.
double final_average_accuracy(const AccuracyMatrix& m);
/// (1/(T−1)) Σ_{s<T} (a[T][s] − a[s][s]); negative means forgetting.
double backward_transfer(const AccuracyMatrix& m);
/// (1/(T−1)) Σ_{s<T} (max_{s≤k≤T} a[k][s] − a[T][s]); never negative.
double average_forgetting(const AccuracyMatrix& m);

/// Σ_ℓ (H_ℓ − target_ℓ)².
double entropy_deviation(std::span<const double> entropies, std::span<const double> targets);
/// Same with every target equal to the cross-layer mean.
double entropy_deviation(std::span<const double> entropies);

/// Population std across layers of the per-step mean entropies, averaged
/// over the last `window` steps (all steps if fewer).
double cross_layer_entropy_spread(const std::vector<std::vector<double>>& per_step_entropies,
                                  std::size_t window = 50);

}  // namespace strata
