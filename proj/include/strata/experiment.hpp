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

// Multi-seed, multi-arm experiment plans and their on-disk artifacts.
//
// Layout under the output directory:
//
//   plan.json                 arms, seeds and base configuration
//   report.csv                per-arm mean and sample std of the headline metrics
//   <arm>/<seed>/manifest.json
//   <arm>/<seed>/accuracy_matrix.csv
//   <arm>/<seed>/layer_accuracy.csv
//   <arm>/<seed>/modulators.csv
//   <arm>/<seed>/telemetry.csv
//   <arm>/<seed>/summary.json
//   <arm>/<seed>/replay_buffer.jsonl
//   <arm>/<seed>/model.ckpt

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "strata/stream.hpp"
#include "strata/trainer.hpp"

namespace strata {

enum class Arm {
  kFull,
  kNoEntropyScaling,    // γ fixed at β
  kNoAdaptiveTraining,  // α fixed at 1
  kPlainEr,             // both off and β = 0: multi-head replay only
};

std::string to_string(Arm arm);
Arm parse_arm(const std::string& text);
/// The base configuration with the arm's switches applied.
RunConfig configure_arm(RunConfig base, Arm arm);

struct ExperimentPlan {
  RunConfig base;
  StreamConfig stream;
  std::vector<std::uint64_t> seeds{0};
  std::vector<Arm> arms{Arm::kFull};
  std::filesystem::path out = "output";
  std::size_t jobs = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

/// "0..9", "1,4,7" or a mix such as "0..2,5". Ranges are inclusive.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Headline numbers of one finished run, as written to summary.json.
struct RunSummary {
  double acc_final = 0.0;
  double bwt = 0.0;
  double average_forgetting = 0.0;
  double entropy_spread_final = 0.0;
  std::vector<double> delta_t_per_task;
  double runtime_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunSummary from_json(const nlohmann::json& j);
};

/// Trains one (arm, seed) pair and writes its artifacts to `dir`.
RunSummary execute_run(const ExperimentPlan& plan, Arm arm, std::uint64_t seed, const std::filesystem::path& dir);

/// Per-arm aggregate rows in plan arm order; summaries are consumed in
/// ascending seed order.
std::string report_csv(const std::vector<Arm>& arms,
                       const std::vector<std::vector<RunSummary>>& summaries_by_arm);

/// Runs every (arm, seed) pair on `plan.jobs` worker threads. Returns 0 on
/// success, 1 if any run failed, 2 if the output directory is unusable.
int run_plan(const ExperimentPlan& plan, std::ostream& log);

/// Recomputes report.csv from the per-run summary.json files under `out`.
/// Returns 0 when they agree byte for byte.
int verify_report(const std::filesystem::path& out, std::ostream& log);

struct CliResult {
  enum class Action { kRun, kVerify, kExportStream, kExit } action = Action::kRun;
  ExperimentPlan plan;
  std::filesystem::path target;  // verify directory or export path
  int exit_code = 0;
};

/// Parses the command line. Flags override --config values, which override
/// defaults. Help and parse errors come back as Action::kExit with the text
/// already written to `out` / `err`.
CliResult parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strata
