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

#include "strata/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strata/errors.hpp"
#include "strata/io.hpp"

namespace strata {

AccuracyMatrix::AccuracyMatrix(std::size_t tasks) : tasks_(tasks), cells_(tasks * tasks) {
  if (tasks == 0) throw UsageError("accuracy matrix: need at least one task");
}

void AccuracyMatrix::set(std::size_t t, std::size_t s, double value) {
  if (t >= tasks_ || s > t) {
    throw UsageError("accuracy matrix: entry (" + std::to_string(t) + ", " + std::to_string(s) + ") outside the lower triangle");
  }
  if (!(value >= 0.0 && value <= 1.0)) throw InputError("accuracy matrix: value outside [0, 1]");
  cells_[t * tasks_ + s] = value;
}

bool AccuracyMatrix::defined(std::size_t t, std::size_t s) const {
  return t < tasks_ && s < tasks_ && cells_[t * tasks_ + s].has_value();
}

double AccuracyMatrix::at(std::size_t t, std::size_t s) const {
  if (!defined(t, s)) {
    throw UsageError("accuracy matrix: entry (" + std::to_string(t) + ", " + std::to_string(s) + ") is undefined");
  }
  return *cells_[t * tasks_ + s];
}

bool AccuracyMatrix::complete() const {
  for (std::size_t t = 0; t < tasks_; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      if (!defined(t, s)) return false;
    }
  }
  return true;
}

std::string AccuracyMatrix::to_csv() const {
  std::string out = "t,s,accuracy\n";
  for (std::size_t t = 0; t < tasks_; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      if (!defined(t, s)) continue;
      out += std::to_string(t + 1) + "," + std::to_string(s + 1) + "," + format_double(at(t, s)) + "\n";
    }
  }
  return out;
}

AccuracyMatrix AccuracyMatrix::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "t,s,accuracy") throw FormatError("accuracy matrix: bad header", 0);
  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
  std::size_t tasks = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw FormatError("accuracy matrix: bad row '" + line + "'", 0);
    const auto t = static_cast<std::size_t>(std::stoul(f[0]));
    const auto s = static_cast<std::size_t>(std::stoul(f[1]));
    if (t == 0 || s == 0) throw FormatError("accuracy matrix: indices are 1-based", 0);
    entries.emplace_back(t - 1, s - 1, parse_double(f[2]));
    tasks = std::max(tasks, t);
  }
  AccuracyMatrix m(tasks);
  for (auto [t, s, v] : entries) m.set(t, s, v);
  return m;
}

double final_average_accuracy(const AccuracyMatrix& m) {
  if (!m.complete()) throw UsageError("final_average_accuracy: matrix is incomplete");
  const std::size_t last = m.tasks() - 1;
  double total = 0.0;
  for (std::size_t s = 0; s <= last; ++s) total += m.at(last, s);
  return total / static_cast<double>(m.tasks());
}

double backward_transfer(const AccuracyMatrix& m) {
  if (m.tasks() < 2) throw UsageError("backward_transfer: needs at least 2 tasks");
  const std::size_t last = m.tasks() - 1;
  double total = 0.0;
  for (std::size_t s = 0; s < last; ++s) total += m.at(last, s) - m.at(s, s);
  return total / static_cast<double>(last);
}

double average_forgetting(const AccuracyMatrix& m) {
  if (m.tasks() < 2) throw UsageError("average_forgetting: needs at least 2 tasks");
  const std::size_t last = m.tasks() - 1;
  double total = 0.0;
  for (std::size_t s = 0; s < last; ++s) {
    // The final row takes part in the maximum so a task that ends at its
    // best accuracy counts as zero forgetting rather than negative.
    double best = m.at(s, s);
    for (std::size_t k = s + 1; k <= last; ++k) best = std::max(best, m.at(k, s));
    total += best - m.at(last, s);
  }
  return total / static_cast<double>(last);
}

double entropy_deviation(std::span<const double> entropies, std::span<const double> targets) {
  if (entropies.size() != targets.size()) {
    throw UsageError("entropy_deviation: " + std::to_string(entropies.size()) + " entropies vs " +
                     std::to_string(targets.size()) + " targets");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    const double d = entropies[i] - targets[i];
    total += d * d;
  }
  return total;
}

double entropy_deviation(std::span<const double> entropies) {
  if (entropies.empty()) return 0.0;
  double mean = 0.0;
  for (double h : entropies) mean += h;
  mean /= static_cast<double>(entropies.size());
  const std::vector<double> targets(entropies.size(), mean);
  return entropy_deviation(entropies, targets);
}

double cross_layer_entropy_spread(const std::vector<std::vector<double>>& per_step_entropies, std::size_t window) {
  if (per_step_entropies.empty()) throw UsageError("cross_layer_entropy_spread: no telemetry");
  if (window == 0) throw UsageError("cross_layer_entropy_spread: window must be positive");
  const std::size_t n = std::min(window, per_step_entropies.size());
  double total = 0.0;
  for (std::size_t i = per_step_entropies.size() - n; i < per_step_entropies.size(); ++i) {
    const auto& h = per_step_entropies[i];
    if (h.empty()) throw UsageError("cross_layer_entropy_spread: step without layers");
    if (std::all_of(h.begin(), h.end(), [&](double v) { return v == h.front(); })) continue;
    double mean = 0.0;
    for (double v : h) mean += v;
    mean /= static_cast<double>(h.size());
    double ss = 0.0;
    for (double v : h) ss += (v - mean) * (v - mean);
    total += std::sqrt(ss / static_cast<double>(h.size()));
  }
  return total / static_cast<double>(n);
}

}  // namespace strata
