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

#include "strata/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "strata/errors.hpp"
#include "strata/io.hpp"

namespace strata {
namespace fs = std::filesystem;

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

// Sample standard deviation; 0 for a single run.
Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::string layer_accuracy_csv(const std::vector<AccuracyMatrix>& per_layer) {
  std::string out = "layer,t,s,accuracy\n";
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    const AccuracyMatrix& m = per_layer[l];
    for (std::size_t t = 0; t < m.tasks(); ++t) {
      for (std::size_t s = 0; s <= t; ++s) {
        out += std::to_string(l + 1) + ',' + std::to_string(t + 1) + ',' + std::to_string(s + 1) + ',' +
               format_double(m.at(t, s)) + '\n';
      }
    }
  }
  return out;
}

std::string modulators_csv(const std::vector<ModulatorState>& per_task) {
  std::string out = "task,layer,accuracy,score,alpha\n";
  for (std::size_t t = 0; t < per_task.size(); ++t) {
    const ModulatorState& m = per_task[t];
    for (std::size_t l = 0; l < m.alpha.size(); ++l) {
      const std::string acc = m.accuracies.empty() ? "" : format_double(m.accuracies[l]);
      out += std::to_string(t + 1) + ',' + std::to_string(l + 1) + ',' + acc + ',' + format_double(m.score[l]) + ',' +
             format_double(m.alpha[l]) + '\n';
    }
  }
  return out;
}

nlohmann::json stream_to_json(const StreamConfig& s) {
  return {
      {"stream", to_string(s.source)},
      {"num-tasks", s.num_tasks},
      {"classes-per-task", s.classes_per_task},
      {"examples-per-class", s.examples_per_class},
      {"input-dim", s.input_dim},
      {"noise-scale", s.noise_scale},
      {"separation", s.separation},
      {"train-fraction", s.train_fraction},
      {"stream-seed", s.seed},
      {"idx-images", s.idx_images.string()},
      {"idx-labels", s.idx_labels.string()},
      {"csv-path", s.csv_path.string()},
  };
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  throw ConfigError("config: unsupported value " + v.dump());
}

std::string json_value_text(const nlohmann::json& v) {
  if (!v.is_array()) return json_scalar_text(v);
  std::vector<std::string> parts;
  for (const auto& e : v) parts.push_back(json_scalar_text(e));
  return join(parts, ",");
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& part : split(text, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("widths: '" + part + "' is not a positive integer");
    }
  }
  return out;
}

}  // namespace

std::string to_string(Arm arm) {
  switch (arm) {
    case Arm::kFull: return "full";
    case Arm::kNoEntropyScaling: return "no_entropy_scaling";
    case Arm::kNoAdaptiveTraining: return "no_adaptive_training";
    case Arm::kPlainEr: return "plain_er";
  }
  return "unknown";
}

Arm parse_arm(const std::string& text) {
  for (Arm a : {Arm::kFull, Arm::kNoEntropyScaling, Arm::kNoAdaptiveTraining, Arm::kPlainEr}) {
    if (to_string(a) == text) return a;
  }
  throw ConfigError("unknown arm '" + text + "' (expected full, no_entropy_scaling, no_adaptive_training, plain_er)");
}

RunConfig configure_arm(RunConfig base, Arm arm) {
  switch (arm) {
    case Arm::kFull:
      base.enable_entropy_scaling = true;
      base.enable_adaptive_training = true;
      break;
    case Arm::kNoEntropyScaling:
      base.enable_entropy_scaling = false;
      base.enable_adaptive_training = true;
      break;
    case Arm::kNoAdaptiveTraining:
      base.enable_entropy_scaling = true;
      base.enable_adaptive_training = false;
      break;
    case Arm::kPlainEr:
      base.enable_entropy_scaling = false;
      base.enable_adaptive_training = false;
      base.beta = 0.0;
      break;
  }
  return base;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
      v = std::stoull(s, &used);
    } catch (const std::logic_error&) {
      throw ConfigError("seeds: '" + s + "' is not a nonnegative integer");
    }
    if (used != s.size()) throw ConfigError("seeds: '" + s + "' is not a nonnegative integer");
    return v;
  };
  for (const std::string& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const std::uint64_t lo = number(part.substr(0, dots));
    const std::uint64_t hi = number(part.substr(dots + 2));
    if (hi < lo) throw ConfigError("seeds: empty range '" + part + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

void ExperimentPlan::validate() const {
  if (!(base.beta > 0.0)) throw ConfigError("beta must be positive");
  base.validate();
  stream.validate();
  if (stream.num_tasks < 2) throw ConfigError("need at least 2 tasks");
  if (seeds.empty()) throw ConfigError("no seeds given");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (arms.empty()) throw ConfigError("no arms given");
  if (std::set<Arm>(arms.begin(), arms.end()).size() != arms.size()) throw ConfigError("arms must be distinct");
  if (jobs == 0) throw ConfigError("jobs must be positive");
}

nlohmann::json ExperimentPlan::to_json() const {
  std::vector<std::string> arm_names;
  for (Arm a : arms) arm_names.push_back(to_string(a));
  return {{"version", kVersion}, {"run", base.to_json()}, {"stream", stream_to_json(stream)},
          {"seeds", seeds},      {"arms", arm_names},       {"jobs", jobs}};
}

nlohmann::json RunSummary::to_json() const {
  return {{"acc_final", acc_final},
          {"bwt", bwt},
          {"average_forgetting", average_forgetting},
          {"entropy_spread_final", entropy_spread_final},
          {"delta_t_per_task", delta_t_per_task},
          {"runtime_seconds", runtime_seconds}};
}

RunSummary RunSummary::from_json(const nlohmann::json& j) {
  RunSummary s;
  s.acc_final = j.at("acc_final").get<double>();
  s.bwt = j.at("bwt").get<double>();
  s.average_forgetting = j.at("average_forgetting").get<double>();
  s.entropy_spread_final = j.at("entropy_spread_final").get<double>();
  s.delta_t_per_task = j.at("delta_t_per_task").get<std::vector<double>>();
  s.runtime_seconds = j.at("runtime_seconds").get<double>();
  return s;
}

RunSummary execute_run(const ExperimentPlan& plan, Arm arm, std::uint64_t seed, const fs::path& dir) {
  RunConfig cfg = configure_arm(plan.base, arm);
  cfg.seed = seed;
  StreamConfig stream = plan.stream;
  stream.seed = seed;
  fs::create_directories(dir);

  nlohmann::json manifest = {{"version", kVersion}, {"arm", to_string(arm)},         {"seed", seed},
                             {"run", cfg.to_json()}, {"stream", stream_to_json(stream)}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  const auto tasks = build_stream(stream);
  const auto start = std::chrono::steady_clock::now();
  RunResult result = run_sequence(tasks, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunSummary summary{result.acc_final,
                     result.bwt,
                     result.average_forgetting,
                     result.entropy_spread_final,
                     result.delta_per_task,
                     seconds};
  write_text_file(dir / "accuracy_matrix.csv", result.accuracy.to_csv());
  write_text_file(dir / "layer_accuracy.csv", layer_accuracy_csv(result.layer_accuracy));
  write_text_file(dir / "modulators.csv", modulators_csv(result.task_modulators));
  write_text_file(dir / "telemetry.csv", telemetry_csv(result.telemetry));
  write_text_file(dir / "summary.json", summary.to_json().dump(2) + "\n");

  ReplayBuffer snapshot(std::max<std::size_t>(1, result.replay_snapshot.size()), Rng(0));
  for (Example& e : result.replay_snapshot) snapshot.insert(std::move(e));
  snapshot.export_jsonl(dir / "replay_buffer.jsonl");
  save_checkpoint(result.net, dir / "model.ckpt");
  return summary;
}

std::string report_csv(const std::vector<Arm>& arms, const std::vector<std::vector<RunSummary>>& summaries_by_arm) {
  std::string out =
      "arm,runs,acc_final_mean,acc_final_std,bwt_mean,bwt_std,average_forgetting_mean,average_forgetting_std,"
      "entropy_spread_final_mean,entropy_spread_final_std\n";
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const auto& runs = summaries_by_arm[a];
    std::vector<double> acc, bwt, af, spread;
    for (const RunSummary& s : runs) {
      acc.push_back(s.acc_final);
      bwt.push_back(s.bwt);
      af.push_back(s.average_forgetting);
      spread.push_back(s.entropy_spread_final);
    }
    out += to_string(arms[a]) + ',' + std::to_string(runs.size());
    for (const auto* xs : {&acc, &bwt, &af, &spread}) {
      const Moments m = moments_of(*xs);
      out += ',' + format_double(m.mean) + ',' + format_double(m.stddev);
    }
    out += '\n';
  }
  return out;
}

int run_plan(const ExperimentPlan& plan, std::ostream& log) {
  plan.validate();
  {
    std::error_code ec;
    fs::create_directories(plan.out, ec);
    const fs::path probe = plan.out / ".write_probe";
    std::ofstream test(probe);
    if (ec || !test) {
      log << "error: output directory " << plan.out << " is not writable\n";
      return 2;
    }
    test.close();
    fs::remove(probe, ec);
  }
  write_text_file(plan.out / "plan.json", plan.to_json().dump(2) + "\n");

  std::vector<std::uint64_t> seeds = plan.seeds;
  std::sort(seeds.begin(), seeds.end());
  struct Job {
    std::size_t arm;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({a, s});
  }

  std::vector<std::vector<std::optional<RunSummary>>> results(plan.arms.size(),
                                                              std::vector<std::optional<RunSummary>>(seeds.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Arm arm = plan.arms[jobs[i].arm];
      const std::uint64_t seed = seeds[jobs[i].seed];
      const fs::path dir = plan.out / to_string(arm) / std::to_string(seed);
      try {
        RunSummary s = execute_run(plan, arm, seed, dir);
        std::lock_guard lock(log_mutex);
        log << "done arm=" << to_string(arm) << " seed=" << seed << " acc_final=" << format_double(s.acc_final)
            << " average_forgetting=" << format_double(s.average_forgetting) << '\n';
        results[jobs[i].arm][jobs[i].seed] = std::move(s);
      } catch (const std::exception& e) {
        failed = true;
        std::lock_guard lock(log_mutex);
        log << "error: run failed arm=" << to_string(arm) << " seed=" << seed << ": " << e.what() << '\n';
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(plan.jobs, jobs.size()); ++w) pool.emplace_back(worker);
    worker();
  }

  std::vector<std::vector<RunSummary>> by_arm(plan.arms.size());
  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    for (auto& r : results[a]) {
      if (r) by_arm[a].push_back(*r);
    }
  }
  write_text_file(plan.out / "report.csv", report_csv(plan.arms, by_arm));
  return failed ? 1 : 0;
}

int verify_report(const fs::path& out, std::ostream& log) {
  try {
    const auto plan = nlohmann::json::parse(read_text_file(out / "plan.json"));
    std::vector<Arm> arms;
    for (const auto& name : plan.at("arms")) arms.push_back(parse_arm(name.get<std::string>()));
    auto seeds = plan.at("seeds").get<std::vector<std::uint64_t>>();
    std::sort(seeds.begin(), seeds.end());

    std::vector<std::vector<RunSummary>> by_arm(arms.size());
    for (std::size_t a = 0; a < arms.size(); ++a) {
      for (std::uint64_t seed : seeds) {
        const fs::path p = out / to_string(arms[a]) / std::to_string(seed) / "summary.json";
        if (!fs::exists(p)) {
          log << "missing " << p.string() << '\n';
          continue;
        }
        by_arm[a].push_back(RunSummary::from_json(nlohmann::json::parse(read_text_file(p))));
      }
    }
    const std::string expected = report_csv(arms, by_arm);
    const std::string actual = read_text_file(out / "report.csv");
    if (expected != actual) {
      log << "report.csv does not match the per-run summaries\n--- recomputed\n" << expected << "--- on disk\n" << actual;
      return 1;
    }
    log << "report.csv matches " << seeds.size() * arms.size() << " run summaries\n";
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

CliResult parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliResult result;
  ExperimentPlan& plan = result.plan;
  RunConfig& run = plan.base;
  StreamConfig& stream = plan.stream;

  std::string stream_source = to_string(stream.source);
  std::string seeds = "0";
  std::string arms = "full";
  std::string sign = to_string(run.entropy_sign);
  std::string widths = "64,64,64,64";
  std::string optimizer = to_string(run.optimizer);
  std::string idx_images, idx_labels, csv_path, out_dir = plan.out.string(), config_path;

  CLI::App app{"Layer-wise entropy-regulated continual learning experiments.", "strata"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.fallthrough();

  app.add_option("--config", config_path, "JSON file of flag values, keys are flag names without dashes (no reference setting)");
  app.add_option("--stream", stream_source, "Task source: synthetic | idx | csv (reference setting: image streams; synthetic here)")->capture_default_str();
  app.add_option("--idx-images", idx_images, "IDX image file, idx source only (no reference setting)");
  app.add_option("--idx-labels", idx_labels, "IDX label file, idx source only (no reference setting)");
  app.add_option("--csv-path", csv_path, "CSV dataset with header label,f0,f1,..., csv source only (no reference setting)");
  app.add_option("--num-tasks", stream.num_tasks, "Number of tasks (reference setting: 5 for CIFAR-10 style streams)")->capture_default_str();
  app.add_option("--classes-per-task", stream.classes_per_task, "Classes per task (reference setting: 2)")->capture_default_str();
  app.add_option("--examples-per-class", stream.examples_per_class, "Synthetic examples per class before the 80/20 split (no reference setting)")
      ->capture_default_str();
  app.add_option("--input-dim", stream.input_dim, "Synthetic input dimension (no reference setting)")->capture_default_str();
  app.add_option("--noise-scale", stream.noise_scale, "Synthetic per-coordinate noise std (no reference setting)")->capture_default_str();
  app.add_option("--separation", stream.separation, "Synthetic expected norm of each class mean (no reference setting)")->capture_default_str();
  app.add_option("--beta", run.beta, "Entropy regularization strength, > 0 (reference setting: 0.005)")
      ->capture_default_str();
  app.add_option("--lr", run.optim.lr, "Learning rate (reference setting: 1e-3)")->capture_default_str();
  app.add_option("--wd", run.optim.weight_decay, "Decoupled weight decay (reference setting: 1e-4)")
      ->capture_default_str();
  app.add_option("--optimizer", optimizer, "adam | sgd (reference setting: adam)")->capture_default_str();
  app.add_option("--batch-size", run.batch_size, "Current-task mini-batch size (reference setting: 10)")
      ->capture_default_str();
  app.add_option("--buffer-batch-size", run.buffer_batch_size, "Replay examples per step (reference setting: 64)")
      ->capture_default_str();
  app.add_option("--buffer-capacity", run.buffer_capacity, "Replay buffer capacity M (reference settings: 200, 500, 1000 and up)")->capture_default_str();
  app.add_option("--val-quota", run.validation_quota, "Validation examples stored per task (no reference setting)")->capture_default_str();
  app.add_option("--entropy-sign", sign, "penalize (+γH) | reward (−γH) (reference setting: penalize)")->capture_default_str();
  app.add_option("--widths", widths, "Comma-separated block widths (reference setting: 4 blocks)")
      ->capture_default_str();
  app.add_option("--spread-window", run.spread_window, "Steps averaged for the final entropy spread (no reference setting)")
      ->capture_default_str();
  app.add_option("--seeds", seeds, "Seeds, e.g. 0..9 or 1,2,5 (reference setting: 10 runs)")->capture_default_str();
  app.add_option("--arms", arms, "Comma-separated: full,no_entropy_scaling,no_adaptive_training,plain_er (reference setting: full plus both ablations)")
      ->capture_default_str();
  app.add_option("--jobs", plan.jobs, "Parallel worker threads (no reference setting; 1 keeps timings comparable)")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory (no reference setting)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check report.csv against the per-run summary.json files");
  verify->add_option("dir", result.target, "Output directory of a finished plan")->required();
  auto* export_stream = app.add_subcommand("export-stream", "Write the configured stream (seed = first seed) as CSV");
  export_stream->add_option("path", result.target, "Destination CSV file")->required();
  app.require_subcommand(0, 1);

  // Values from --config are placed ahead of the command line; with
  // take-last semantics the command line wins.
  std::vector<std::string> full_args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    if (path.empty()) continue;
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "config" || app.get_option_no_throw("--" + key) == nullptr) {
        throw ConfigError("config file " + path + ": unknown key '" + key + "'");
      }
      full_args.push_back("--" + key);
      full_args.push_back(json_value_text(value));
    }
  }
  full_args.insert(full_args.end(), args.begin(), args.end());
  std::reverse(full_args.begin(), full_args.end());

  try {
    app.parse(full_args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    result.action = CliResult::Action::kExit;
    return result;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    result.action = CliResult::Action::kExit;
    result.exit_code = 2;
    return result;
  }

  if (verify->parsed()) {
    result.action = CliResult::Action::kVerify;
    return result;
  }

  stream.source = parse_stream_source(stream_source);
  stream.idx_images = idx_images;
  stream.idx_labels = idx_labels;
  stream.csv_path = csv_path;
  run.optimizer = parse_optimizer(optimizer);
  run.entropy_sign = parse_entropy_sign(sign);
  run.widths = parse_widths(widths);
  plan.seeds = parse_seeds(seeds);
  plan.arms.clear();
  for (const std::string& a : split(arms, ',')) plan.arms.push_back(parse_arm(a));
  plan.out = out_dir;
  plan.validate();

  result.action = export_stream->parsed() ? CliResult::Action::kExportStream : CliResult::Action::kRun;
  return result;
}

}  // namespace strata
