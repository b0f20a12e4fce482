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

#include "strata/replay.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "strata/errors.hpp"
#include "strata/io.hpp"

namespace strata {

ReplayBuffer::ReplayBuffer(std::size_t capacity, Rng rng) : capacity_(capacity), rng_(std::move(rng)) {
  if (capacity_ == 0) throw ConfigError("replay buffer: capacity must be positive");
  items_.reserve(capacity_);
}

void ReplayBuffer::insert(Example item) {
  if (seen_ < capacity_) {
    items_.push_back(std::move(item));
  } else {
    const std::uint64_t j = rng_.uniform_int(0, seen_);
    if (j < capacity_) items_[j] = std::move(item);
  }
  ++seen_;
}

std::vector<Example> ReplayBuffer::sample(std::size_t size, Rng& rng) const {
  if (size >= items_.size()) return items_;
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Example> out;
  out.reserve(size);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, idx.size() - 1));
    std::swap(idx[i], idx[j]);
    out.push_back(items_[idx[i]]);
  }
  return out;
}

void ReplayBuffer::export_jsonl(const std::filesystem::path& path) const {
  std::string text;
  for (const Example& e : items_) {
    nlohmann::json line = {{"task", e.task}, {"label", e.label}, {"x", base64_encode(doubles_to_le_bytes(e.x))}};
    text += line.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Example> ReplayBuffer::import_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Example> out;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      try {
        auto j = nlohmann::json::parse(line);
        out.push_back(Example{le_bytes_to_doubles(base64_decode(j.at("x").get<std::string>())),
                              j.at("label").get<int>(), j.at("task").get<int>()});
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("replay snapshot: ") + e.what(), offset);
      }
    }
    offset += line.size() + 1;
  }
  return out;
}

ValidationBuffer::ValidationBuffer(std::size_t per_task_quota) : quota_(per_task_quota) {
  if (quota_ == 0) throw ConfigError("validation buffer: quota must be positive");
}

void ValidationBuffer::update(std::span<const Example> task_data, int task, Rng& rng) {
  if (task_data.empty()) throw UsageError("validation buffer: task " + std::to_string(task) + " has no data");

  std::map<int, std::vector<const Example*>> by_class;
  for (const Example& e : task_data) by_class[e.label].push_back(&e);

  std::vector<int> classes;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members.begin(), members.end());
    classes.push_back(label);
  }
  rng.shuffle(classes.begin(), classes.end());

  // Round-robin over classes in shuffled order, skipping exhausted ones.
  std::map<int, std::size_t> take;
  std::size_t stored = 0;
  bool progress = true;
  while (stored < quota_ && progress) {
    progress = false;
    for (int c : classes) {
      if (stored == quota_) break;
      if (take[c] < by_class[c].size()) {
        ++take[c];
        ++stored;
        progress = true;
      }
    }
  }

  std::vector<Example>& slot = per_task_[task];
  slot.clear();
  for (auto& [label, members] : by_class) {
    for (std::size_t i = 0; i < take[label]; ++i) slot.push_back(*members[i]);
  }
}

std::size_t ValidationBuffer::size() const {
  std::size_t n = 0;
  for (const auto& [task, items] : per_task_) n += items.size();
  return n;
}

std::vector<Example> ValidationBuffer::pooled() const {
  std::vector<Example> out;
  for (const auto& [task, items] : per_task_) out.insert(out.end(), items.begin(), items.end());
  return out;
}

std::vector<double> evaluate_layer_accuracies(const LayeredNet& net, const ValidationBuffer& vbuf) {
  if (vbuf.empty()) throw UsageError("evaluate_layer_accuracies: validation buffer is empty");
  const auto examples = vbuf.pooled();
  const auto logits = layer_logits(net, stack_inputs(examples, net.input_dim()));
  std::vector<double> acc;
  for (const Tensor& z : logits) {
    const auto pred = argmax_rows(z);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) hits += pred[i] == examples[i].label;
    acc.push_back(static_cast<double>(hits) / static_cast<double>(examples.size()));
  }
  return acc;
}

}  // namespace strata
