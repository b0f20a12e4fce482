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


#include <doctest.h>

#include <cmath>

#include "strata/errors.hpp"
#include "strata/experiment.hpp"
#include "strata/trainer.hpp"
#include "support.hpp"

using namespace strata;
using strata::testing::small_stream;

namespace {

RunConfig small_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.widths = {16, 16, 16};
  cfg.seed = seed;
  return cfg;
}

std::size_t expected_steps(const std::vector<TaskSpec>& tasks, std::size_t batch) {
  std::size_t n = 0;
  for (const TaskSpec& t : tasks) n += (t.train.size() + batch - 1) / batch;
  return n;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("step count, matrix shape and finite losses") {
    const auto tasks = make_synthetic_stream(small_stream(1));
    RunConfig cfg = small_config(1);
    cfg.batch_size = 7;
    const RunResult r = run_sequence(tasks, cfg);
    CHECK(r.telemetry.size() == expected_steps(tasks, 7));
    CHECK(r.accuracy.tasks() == 3);
    CHECK(r.accuracy.complete());
    CHECK(r.layer_accuracy.size() == 3);
    CHECK(r.delta_per_task.size() == 3);
    for (const StepTelemetry& s : r.telemetry) {
      CHECK(std::isfinite(s.total));
      CHECK(s.entropy.size() == 3);
    }
    CHECK(r.telemetry.back().step == r.telemetry.size());
    CHECK(r.average_forgetting >= 0.0);
  }

  TEST_CASE("alpha stays neutral on the first task under every arm") {
    const auto tasks = make_synthetic_stream(small_stream(2));
    for (Arm arm : {Arm::kFull, Arm::kNoEntropyScaling, Arm::kNoAdaptiveTraining, Arm::kPlainEr}) {
      const RunResult r = run_sequence(tasks, configure_arm(small_config(2), arm));
      for (double a : r.task_modulators.front().alpha) CHECK(a == 1.0);
      if (arm == Arm::kNoAdaptiveTraining || arm == Arm::kPlainEr) {
        for (const auto& m : r.task_modulators)
          for (double a : m.alpha) CHECK(a == 1.0);
      }
    }
  }

  TEST_CASE("modulators stay within bounds during training") {
    const auto tasks = make_synthetic_stream(small_stream(3));
    const RunConfig cfg = small_config(3);
    const RunResult r = run_sequence(tasks, cfg);
    for (const StepTelemetry& s : r.telemetry) {
      for (double a : s.alpha) CHECK((a >= std::exp(-1.0) && a <= std::exp(1.0)));
      for (double g : s.gamma) CHECK((g >= cfg.beta * std::exp(-1.0) && g <= cfg.beta * std::exp(1.0)));
    }
  }

  TEST_CASE("ablation arms share all state until their first divergent computation") {
    const auto tasks = make_synthetic_stream(small_stream(4));
    const RunConfig base = small_config(4);
    const RunConfig full = configure_arm(base, Arm::kFull);
    const RunConfig no_alpha = configure_arm(base, Arm::kNoAdaptiveTraining);
    const RunConfig no_gamma = configure_arm(base, Arm::kNoEntropyScaling);

    // Configurations differ only in the two switches.
    RunConfig a = no_alpha, b = no_gamma;
    a.enable_adaptive_training = true;
    b.enable_entropy_scaling = true;
    CHECK(a.to_json() == full.to_json());
    CHECK(b.to_json() == full.to_json());

    // Without α the first task is computed identically.
    RunState s1 = RunState::create(full, 8, 6);
    RunState s2 = RunState::create(no_alpha, 8, 6);
    run_task(s1, tasks[0], full);
    run_task(s2, tasks[0], no_alpha);
    CHECK(s1.net == s2.net);
    CHECK(telemetry_csv(s1.telemetry) == telemetry_csv(s2.telemetry));
    CHECK(std::equal(s1.buffer.items().begin(), s1.buffer.items().end(), s2.buffer.items().begin(),
                     s2.buffer.items().end()));

    // Without entropy scaling the very first forward pass is shared.
    RunState s3 = RunState::create(no_gamma, 8, 6);
    CHECK(s3.net == RunState::create(full, 8, 6).net);
    run_task(s3, tasks[0], no_gamma);
    CHECK(s3.telemetry.front().entropy == s1.telemetry.front().entropy);
    CHECK(s3.telemetry.front().loss == s1.telemetry.front().loss);
  }

  TEST_CASE("identical configuration, seed and stream reproduce every artifact bitwise") {
    const auto tasks = make_synthetic_stream(small_stream(5));
    const RunResult a = run_sequence(tasks, small_config(5));
    const RunResult b = run_sequence(tasks, small_config(5));
    CHECK(a.accuracy.to_csv() == b.accuracy.to_csv());
    CHECK(telemetry_csv(a.telemetry) == telemetry_csv(b.telemetry));
    CHECK(a.net == b.net);
    CHECK(a.replay_snapshot == b.replay_snapshot);
  }

  TEST_CASE("plain replay learns a separable two-class toy") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      StreamConfig s;
      s.num_tasks = 1;
      s.classes_per_task = 2;
      s.examples_per_class = 500;
      s.input_dim = 8;
      s.separation = 8.0;
      s.seed = seed;
      const auto tasks = make_synthetic_stream(s);
      const RunConfig cfg = configure_arm(small_config(seed), Arm::kPlainEr);
      RunState state = RunState::create(cfg, 8, 2);
      run_task(state, tasks[0], cfg);
      CHECK(head_accuracy(state.net, tasks[0].test, 2) > 0.95);
    }
  }

  TEST_CASE("repeating a task does not lose accuracy on it") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      StreamConfig s = small_stream(seed);
      s.num_tasks = 1;
      const auto one = make_synthetic_stream(s);
      TaskSpec again = one[0];
      again.id = 2;
      for (auto* split : {&again.train, &again.test})
        for (Example& e : *split) e.task = 2;
      const RunResult r = run_sequence({one[0], again}, small_config(seed));
      CHECK(r.accuracy.at(1, 0) >= r.accuracy.at(0, 0) - 0.02);
    }
  }

  TEST_CASE("invalid tasks are rejected before any state changes") {
    auto tasks = make_synthetic_stream(small_stream(6));
    const RunConfig cfg = small_config(6);
    RunState state = RunState::create(cfg, 8, 6);
    const LayeredNet before = state.net;

    TaskSpec bad_label = tasks[0];
    bad_label.train.back().label = 17;
    CHECK_THROWS_AS(run_task(state, bad_label, cfg), ConfigError);
    TaskSpec bad_width = tasks[0];
    bad_width.train.front().x.pop_back();
    CHECK_THROWS_AS(run_task(state, bad_width, cfg), ConfigError);
    TaskSpec empty = tasks[0];
    empty.train.clear();
    CHECK_THROWS_AS(run_task(state, empty, cfg), ConfigError);
    CHECK(state.net == before);
    CHECK(state.step == 0);
    CHECK(state.buffer.seen() == 0);

    run_task(state, tasks[1], cfg);
    CHECK_THROWS_AS(run_task(state, tasks[0], cfg), ConfigError);

    auto no_test = tasks;
    no_test[1].test.clear();
    CHECK_THROWS_AS(run_sequence(no_test, cfg), ConfigError);
    CHECK_THROWS_AS(run_sequence({tasks[0]}, cfg), ConfigError);
    RunConfig bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(run_sequence(tasks, bad), ConfigError);
  }

  TEST_CASE("property: relabeling classes within a task with matching head columns keeps accuracy") {
    const auto tasks = make_synthetic_stream(small_stream(7));
    const RunResult r = run_sequence(tasks, small_config(7));
    LayeredNet swapped = r.net;
    // Swap classes 2 and 3 (task 2) in every head.
    for (std::size_t l = 0; l < swapped.layers(); ++l) {
      for (ParamId id : {swapped.head_weight(l), swapped.head_bias(l)}) {
        Tensor& p = swapped.parameters()[id];
        for (std::size_t row = 0; row < p.rows(); ++row) std::swap(p.at(row, 2), p.at(row, 3));
      }
    }
    std::vector<Example> relabeled = tasks[1].test;
    for (Example& e : relabeled) e.label = e.label == 2 ? 3 : 2;
    for (std::size_t l = 0; l < r.net.layers(); ++l) {
      CHECK(head_accuracy(swapped, relabeled, l) == head_accuracy(r.net, tasks[1].test, l));
    }
  }

  TEST_CASE("run config JSON round trip and telemetry header") {
    RunConfig cfg = small_config(9);
    cfg.entropy_sign = EntropySign::kReward;
    cfg.optimizer = OptimizerKind::kSgd;
    CHECK(RunConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
    CHECK(telemetry_csv({}) == "step,task,layer,mean_entropy,z,gamma,alpha,loss\n");
  }
}
