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

// Class-incremental task streams.
//
// Classes are assigned to tasks in ascending label order: task t (1-based)
// owns labels [(t-1)·c, t·c) for c classes per task. Within each class the
// first 80% of its examples (in generation or file order) form the training
// split and the rest the test split.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "strata/data.hpp"
#include "strata/rng.hpp"

namespace strata {

enum class StreamSource { kSynthetic, kIdx, kCsv };

std::string to_string(StreamSource source);
StreamSource parse_stream_source(const std::string& text);

struct StreamConfig {
  StreamSource source = StreamSource::kSynthetic;
  std::size_t num_tasks = 5;
  std::size_t classes_per_task = 2;
  // Synthetic only: examples generated per class, before the train/test split.
  std::size_t examples_per_class = 625;
  std::size_t input_dim = 32;
  double noise_scale = 1.0;
  double separation = 3.0;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::filesystem::path idx_images;
  std::filesystem::path idx_labels;
  std::filesystem::path csv_path;

  std::size_t total_classes() const noexcept { return num_tasks * classes_per_task; }
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct TaskSpec {
  int id = 0;  // 1-based
  std::vector<int> classes;
  std::vector<Example> train;
  std::vector<Example> test;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Gaussian classes: mean_c = separation·N(0, I)/sqrt(input_dim) drawn once per class,
/// examples mean_c + noise_scale·N(0, I).
std::vector<TaskSpec> make_synthetic_stream(const StreamConfig& cfg);

/// Groups per-class examples (already in split order) into tasks.
std::vector<TaskSpec> partition_tasks(const std::vector<std::vector<std::vector<double>>>& per_class,
                                      const StreamConfig& cfg);

struct IdxDataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> images;  // pixels scaled to [0, 1]
  std::vector<int> labels;
};

/// Parses an IDX image file (magic 0x00000803) and label file (0x00000801).
IdxDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Labels >= cfg.total_classes() are dropped; every retained class must be present.
std::vector<TaskSpec> load_idx_stream(const std::filesystem::path& images, const std::filesystem::path& labels,
                                      const StreamConfig& cfg);

/// CSV with header `label,f0,f1,...` and one example per row.
std::vector<TaskSpec> load_csv_stream(const std::filesystem::path& path, const StreamConfig& cfg);

/// Writes every example of `tasks` grouped by class, training rows before
/// test rows, so that load_csv_stream reproduces the same tasks.
void write_csv_stream(const std::filesystem::path& path, const std::vector<TaskSpec>& tasks);

/// Dispatches on cfg.source.
std::vector<TaskSpec> build_stream(const StreamConfig& cfg);

/// One shuffled pass over the training split in chunks of `batch_size`;
/// the final chunk may be shorter.
std::vector<std::vector<Example>> batches(const TaskSpec& task, std::size_t batch_size, Rng& rng);

}  // namespace strata
