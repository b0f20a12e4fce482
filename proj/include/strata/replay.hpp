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
#include <map>
#include <span>
#include <vector>

#include "strata/data.hpp"
#include "strata/model.hpp"
#include "strata/rng.hpp"

namespace strata {

/// Fixed-capacity rehearsal memory filled by reservoir sampling: after n
/// insertions every item seen so far is resident with probability M/n.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Rng rng);

  void insert(Example item);

  /// Uniform draw without replacement; the whole buffer when `size` is at
  /// least the resident count. Empty buffer yields an empty batch.
  std::vector<Example> sample(std::size_t size, Rng& rng) const;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  std::uint64_t seen() const noexcept { return seen_; }
  std::span<const Example> items() const noexcept { return items_; }

  /// One JSON object per line: {"task", "label", "x"} with x the base64 of
  /// the input as little-endian float64.
  void export_jsonl(const std::filesystem::path& path) const;
  static std::vector<Example> import_jsonl(const std::filesystem::path& path);

 private:
  std::size_t capacity_;
  std::vector<Example> items_;
  std::uint64_t seen_ = 0;
  Rng rng_;
};

/// Class-balanced per-task samples used to score each head on past tasks.
class ValidationBuffer {
 public:
  explicit ValidationBuffer(std::size_t per_task_quota);

  /// Stores up to `quota` examples of `task`, spread over its classes as
  /// evenly as supply allows; which classes get the remainder is random.
  void update(std::span<const Example> task_data, int task, Rng& rng);

  std::size_t quota() const noexcept { return quota_; }
  const std::map<int, std::vector<Example>>& tasks() const noexcept { return per_task_; }
  bool empty() const noexcept { return per_task_.empty(); }
  std::size_t size() const;
  /// All stored examples in task order.
  std::vector<Example> pooled() const;

 private:
  std::size_t quota_;
  std::map<int, std::vector<Example>> per_task_;
};

/// Accuracy of every head over the pooled validation examples.
std::vector<double> evaluate_layer_accuracies(const LayeredNet& net, const ValidationBuffer& vbuf);

}  // namespace strata
