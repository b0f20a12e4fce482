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

// Online class-incremental training with per-layer entropy regulation.
//
// For each task: when past tasks exist and adaptive training is on, the
// loss modulators α are recomputed once from head accuracies on the
// validation buffer. Then one pass over the task's training split in
// mini-batches; each mini-batch is concatenated with a replay sample,
// pushed through the net, scored with the composite loss and followed by a
// single optimizer step. The current mini-batch is then offered to the
// reservoir. After the pass the validation buffer receives a class-balanced
// sample of the task.

#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "strata/metrics.hpp"
#include "strata/model.hpp"
#include "strata/optimizer.hpp"
#include "strata/regulator.hpp"
#include "strata/replay.hpp"
#include "strata/stream.hpp"

namespace strata {

inline constexpr const char* kVersion = "strata 0.1.0";

struct RunConfig {
  double beta = 0.005;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  OptimizerOptions optim;  // lr 1e-3, weight decay 1e-4, Adam 0.9 / 0.999 / 1e-8
  std::size_t batch_size = 10;
  std::size_t buffer_batch_size = 64;
  std::size_t buffer_capacity = 200;
  std::size_t validation_quota = 64;
  bool enable_entropy_scaling = true;
  bool enable_adaptive_training = true;
  EntropySign entropy_sign = EntropySign::kPenalize;
  std::uint64_t seed = 0;
  std::vector<std::size_t> widths{64, 64, 64, 64};
  std::size_t spread_window = 50;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct StepTelemetry {
  std::uint64_t step = 0;  // 1-based, global across tasks
  int task = 0;
  std::vector<double> entropy;
  std::vector<double> z;
  std::vector<double> gamma;
  std::vector<double> alpha;
  std::vector<double> loss;
  double total = 0.0;
};

/// Mutable state of one run. Exclusively owned by that run.
struct RunState {
  LayeredNet net;
  AdamMoments moments;
  ReplayBuffer buffer;
  ValidationBuffer validation;
  ModulatorState modulators;
  Rng rng;
  int last_task = 0;
  std::uint64_t step = 0;
  std::vector<StepTelemetry> telemetry;
  std::vector<ModulatorState> task_modulators;  // α in force for each task

  static RunState create(const RunConfig& cfg, std::size_t input_dim, std::size_t classes);
};

/// Trains on one task. Configuration and task are validated before any
/// state changes.
void run_task(RunState& state, const TaskSpec& task, const RunConfig& cfg);

/// Fraction of `examples` whose head-`layer` prediction matches the label.
double head_accuracy(const LayeredNet& net, const std::vector<Example>& examples, std::size_t layer);

struct RunResult {
  AccuracyMatrix accuracy;                    // deepest head
  std::vector<AccuracyMatrix> layer_accuracy; // one per head
  std::vector<StepTelemetry> telemetry;
  std::vector<ModulatorState> task_modulators;
  std::vector<double> delta_per_task;         // Σ_ℓ (H̄_ℓ − mean H̄)² of per-task mean entropies
  double acc_final = 0.0;
  double bwt = 0.0;
  double average_forgetting = 0.0;
  double entropy_spread_final = 0.0;
  LayeredNet net;
  std::vector<Example> replay_snapshot;
};

/// Runs every task in order and evaluates the deepest head on the test
/// split of each task seen so far after every task. Needs ≥ 2 tasks.
RunResult run_sequence(const std::vector<TaskSpec>& tasks, const RunConfig& cfg);

/// `step,task,layer,mean_entropy,z,gamma,alpha,loss`, one row per layer per step.
std::string telemetry_csv(const std::vector<StepTelemetry>& telemetry);

}  // namespace strata
