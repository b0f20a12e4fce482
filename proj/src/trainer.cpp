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

#include "strata/trainer.hpp"

#include <cmath>

#include "strata/errors.hpp"
#include "strata/io.hpp"

namespace strata {
namespace {

constexpr std::uint64_t kTrainSalt = 0x545241494eULL;      // "TRAIN"
constexpr std::uint64_t kReservoirSalt = 0x5245534552ULL;  // "RESER"

void validate_task(const RunState& state, const TaskSpec& task) {
  if (task.id <= state.last_task) {
    throw ConfigError("run_task: task ids must increase (got " + std::to_string(task.id) + " after " +
                      std::to_string(state.last_task) + ")");
  }
  if (task.train.empty()) throw ConfigError("run_task: task " + std::to_string(task.id) + " has no training examples");
  for (const auto* split : {&task.train, &task.test}) {
    for (const Example& e : *split) {
      if (e.x.size() != state.net.input_dim()) {
        throw ConfigError("run_task: example width " + std::to_string(e.x.size()) + " does not match input width " +
                          std::to_string(state.net.input_dim()));
      }
      if (e.label < 0 || static_cast<std::size_t>(e.label) >= state.net.classes()) {
        throw ConfigError("run_task: label " + std::to_string(e.label) + " outside the class range");
      }
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a finite nonnegative number");
  if (!(optim.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(optim.weight_decay >= 0.0)) throw ConfigError("weight decay must be nonnegative");
  if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0) || !(optim.beta2 >= 0.0 && optim.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(optim.eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (buffer_capacity == 0) throw ConfigError("buffer capacity must be positive");
  if (validation_quota == 0) throw ConfigError("validation quota must be positive");
  if (widths.size() < 2) throw ConfigError("need at least 2 layer widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("layer widths must be positive");
  }
  if (spread_window == 0) throw ConfigError("spread window must be positive");
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"beta", beta},
      {"optimizer", to_string(optimizer)},
      {"lr", optim.lr},
      {"wd", optim.weight_decay},
      {"adam-beta1", optim.beta1},
      {"adam-beta2", optim.beta2},
      {"adam-eps", optim.eps},
      {"batch-size", batch_size},
      {"buffer-batch-size", buffer_batch_size},
      {"buffer-capacity", buffer_capacity},
      {"val-quota", validation_quota},
      {"entropy-scaling", enable_entropy_scaling},
      {"adaptive-training", enable_adaptive_training},
      {"entropy-sign", to_string(entropy_sign)},
      {"seed", seed},
      {"widths", widths},
      {"spread-window", spread_window},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.beta = j.value("beta", c.beta);
  c.optimizer = parse_optimizer(j.value("optimizer", to_string(c.optimizer)));
  c.optim.lr = j.value("lr", c.optim.lr);
  c.optim.weight_decay = j.value("wd", c.optim.weight_decay);
  c.optim.beta1 = j.value("adam-beta1", c.optim.beta1);
  c.optim.beta2 = j.value("adam-beta2", c.optim.beta2);
  c.optim.eps = j.value("adam-eps", c.optim.eps);
  c.batch_size = j.value("batch-size", c.batch_size);
  c.buffer_batch_size = j.value("buffer-batch-size", c.buffer_batch_size);
  c.buffer_capacity = j.value("buffer-capacity", c.buffer_capacity);
  c.validation_quota = j.value("val-quota", c.validation_quota);
  c.enable_entropy_scaling = j.value("entropy-scaling", c.enable_entropy_scaling);
  c.enable_adaptive_training = j.value("adaptive-training", c.enable_adaptive_training);
  c.entropy_sign = parse_entropy_sign(j.value("entropy-sign", to_string(c.entropy_sign)));
  c.seed = j.value("seed", c.seed);
  c.widths = j.value("widths", c.widths);
  c.spread_window = j.value("spread-window", c.spread_window);
  return c;
}

RunState RunState::create(const RunConfig& cfg, std::size_t input_dim, std::size_t classes) {
  cfg.validate();
  LayeredNet net = LayeredNet::init(input_dim, cfg.widths, classes, cfg.seed);
  AdamMoments moments = AdamMoments::zeros_like(net.parameters());
  return RunState{std::move(net),
                  std::move(moments),
                  ReplayBuffer(cfg.buffer_capacity, Rng::derive(cfg.seed, kReservoirSalt)),
                  ValidationBuffer(cfg.validation_quota),
                  ModulatorState::neutral(cfg.widths.size()),
                  Rng::derive(cfg.seed, kTrainSalt),
                  0,
                  0,
                  {},
                  {}};
}

void run_task(RunState& state, const TaskSpec& task, const RunConfig& cfg) {
  cfg.validate();
  validate_task(state, task);
  if (cfg.widths != state.net.widths()) throw ConfigError("run_task: config widths differ from the net");

  const std::size_t layers = state.net.layers();
  if (cfg.enable_adaptive_training && !state.validation.empty()) {
    state.modulators = accuracy_modulators(evaluate_layer_accuracies(state.net, state.validation));
  } else {
    state.modulators = ModulatorState::neutral(layers);
  }
  state.task_modulators.push_back(state.modulators);

  const RegularizerOptions reg{cfg.beta, cfg.enable_entropy_scaling, cfg.entropy_sign};
  for (auto& batch : batches(task, cfg.batch_size, state.rng)) {
    std::vector<Example> mixed = batch;
    if (cfg.buffer_batch_size > 0) {
      auto replay = state.buffer.sample(cfg.buffer_batch_size, state.rng);
      mixed.insert(mixed.end(), std::make_move_iterator(replay.begin()), std::make_move_iterator(replay.end()));
    }
    const Tensor x = stack_inputs(mixed, state.net.input_dim());
    const std::vector<int> labels = labels_of(mixed);

    Tape tape;
    const ForwardRecord record = forward(tape, state.net, x);
    CompositeLoss loss = composite_loss(record, labels, state.modulators.alpha, reg);
    const double total = loss.total.value().item();
    if (!std::isfinite(total)) {
      throw std::runtime_error("run_task: non-finite loss at step " + std::to_string(state.step + 1));
    }
    const Gradients grads = tape.backward(loss.total);
    if (cfg.optimizer == OptimizerKind::kAdam) {
      adam_step(state.net.parameters(), grads, state.moments, cfg.optim);
    } else {
      sgd_step(state.net.parameters(), grads, cfg.optim);
    }
    for (Example& e : batch) state.buffer.insert(std::move(e));

    ++state.step;
    state.telemetry.push_back(StepTelemetry{state.step, task.id, std::move(loss.entropy.mean_entropy),
                                            std::move(loss.entropy.z), std::move(loss.gamma),
                                            state.modulators.alpha, std::move(loss.layer_loss), total});
  }
  state.validation.update(task.train, task.id, state.rng);
  state.last_task = task.id;
}

double head_accuracy(const LayeredNet& net, const std::vector<Example>& examples, std::size_t layer) {
  if (examples.empty()) throw UsageError("head_accuracy: no examples");
  const auto pred = predict_layer(net, stack_inputs(examples, net.input_dim()), layer);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) hits += pred[i] == examples[i].label;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

RunResult run_sequence(const std::vector<TaskSpec>& tasks, const RunConfig& cfg) {
  cfg.validate();
  if (tasks.size() < 2) throw ConfigError("run_sequence: need at least 2 tasks, got " + std::to_string(tasks.size()));
  std::size_t classes = 0;
  for (const TaskSpec& t : tasks) {
    if (t.train.empty()) throw ConfigError("run_sequence: task " + std::to_string(t.id) + " has no training examples");
    if (t.test.empty()) throw ConfigError("run_sequence: task " + std::to_string(t.id) + " has no test examples");
    for (int c : t.classes) classes = std::max(classes, static_cast<std::size_t>(c) + 1);
  }
  const std::size_t input_dim = tasks.front().train.front().x.size();

  RunState state = RunState::create(cfg, input_dim, classes);
  const std::size_t layers = state.net.layers();
  const std::size_t deepest = layers - 1;
  std::vector<AccuracyMatrix> per_layer(layers, AccuracyMatrix(tasks.size()));
  std::vector<double> delta;

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::size_t first_step = state.telemetry.size();
    run_task(state, tasks[t], cfg);

    std::vector<double> mean_h(layers, 0.0);
    const std::size_t steps = state.telemetry.size() - first_step;
    for (std::size_t i = first_step; i < state.telemetry.size(); ++i) {
      for (std::size_t l = 0; l < layers; ++l) mean_h[l] += state.telemetry[i].entropy[l];
    }
    for (double& h : mean_h) h /= static_cast<double>(steps);
    delta.push_back(entropy_deviation(mean_h));

    for (std::size_t s = 0; s <= t; ++s) {
      const auto logits = layer_logits(state.net, stack_inputs(tasks[s].test, input_dim));
      for (std::size_t l = 0; l < layers; ++l) {
        const auto pred = argmax_rows(logits[l]);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == tasks[s].test[i].label;
        per_layer[l].set(t, s, static_cast<double>(hits) / static_cast<double>(pred.size()));
      }
    }
  }

  std::vector<std::vector<double>> entropies;
  entropies.reserve(state.telemetry.size());
  for (const auto& row : state.telemetry) entropies.push_back(row.entropy);

  AccuracyMatrix final_head = per_layer[deepest];
  RunResult result{final_head,
                   std::move(per_layer),
                   std::move(state.telemetry),
                   std::move(state.task_modulators),
                   std::move(delta),
                   final_average_accuracy(final_head),
                   backward_transfer(final_head),
                   average_forgetting(final_head),
                   cross_layer_entropy_spread(entropies, cfg.spread_window),
                   std::move(state.net),
                   {state.buffer.items().begin(), state.buffer.items().end()}};
  return result;
}

std::string telemetry_csv(const std::vector<StepTelemetry>& telemetry) {
  std::string out = "step,task,layer,mean_entropy,z,gamma,alpha,loss\n";
  for (const StepTelemetry& row : telemetry) {
    for (std::size_t l = 0; l < row.entropy.size(); ++l) {
      out += std::to_string(row.step) + ',' + std::to_string(row.task) + ',' + std::to_string(l + 1) + ',' +
             format_double(row.entropy[l]) + ',' + format_double(row.z[l]) + ',' + format_double(row.gamma[l]) +
             ',' + format_double(row.alpha[l]) + ',' + format_double(row.loss[l]) + '\n';
    }
  }
  return out;
}

}  // namespace strata
