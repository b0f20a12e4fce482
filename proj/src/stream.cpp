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

#include "strata/stream.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "strata/errors.hpp"
#include "strata/io.hpp"

namespace strata {
namespace {

constexpr std::uint64_t kStreamSalt = 0x5354524541ULL;  // "STREA"
constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::string& what) {
  if (offset + 4 > bytes.size()) throw FormatError(what + ": truncated header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::size_t train_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

}  // namespace

std::string to_string(StreamSource source) {
  switch (source) {
    case StreamSource::kSynthetic: return "synthetic";
    case StreamSource::kIdx: return "idx";
    case StreamSource::kCsv: return "csv";
  }
  return "unknown";
}

StreamSource parse_stream_source(const std::string& text) {
  if (text == "synthetic") return StreamSource::kSynthetic;
  if (text == "idx") return StreamSource::kIdx;
  if (text == "csv") return StreamSource::kCsv;
  throw ConfigError("stream source must be synthetic, idx or csv; got '" + text + "'");
}

void StreamConfig::validate() const {
  if (num_tasks == 0) throw ConfigError("stream: num_tasks must be positive");
  if (classes_per_task == 0) throw ConfigError("stream: classes_per_task must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("stream: train_fraction must lie in (0, 1)");
  switch (source) {
    case StreamSource::kSynthetic:
      if (input_dim == 0) throw ConfigError("stream: input_dim must be positive");
      if (examples_per_class == 0) throw ConfigError("stream: examples_per_class must be positive");
      if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw ConfigError("stream: noise_scale must be >= 0");
      if (!std::isfinite(separation)) throw ConfigError("stream: separation must be finite");
      if (!idx_images.empty() || !idx_labels.empty() || !csv_path.empty()) {
        throw ConfigError("stream: file paths given for the synthetic source");
      }
      break;
    case StreamSource::kIdx:
      if (idx_images.empty() || idx_labels.empty()) throw ConfigError("stream: idx source needs image and label paths");
      if (!csv_path.empty()) throw ConfigError("stream: csv path given for the idx source");
      break;
    case StreamSource::kCsv:
      if (csv_path.empty()) throw ConfigError("stream: csv source needs a csv path");
      if (!idx_images.empty() || !idx_labels.empty()) throw ConfigError("stream: idx paths given for the csv source");
      break;
  }
}

std::vector<TaskSpec> partition_tasks(const std::vector<std::vector<std::vector<double>>>& per_class,
                                      const StreamConfig& cfg) {
  if (per_class.size() != cfg.total_classes()) {
    throw ConfigError("stream: " + std::to_string(per_class.size()) + " classes cannot be split into " +
                      std::to_string(cfg.num_tasks) + " tasks of " + std::to_string(cfg.classes_per_task));
  }
  std::vector<TaskSpec> tasks(cfg.num_tasks);
  for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
    TaskSpec& task = tasks[t];
    task.id = static_cast<int>(t + 1);
    for (std::size_t k = 0; k < cfg.classes_per_task; ++k) {
      const std::size_t c = t * cfg.classes_per_task + k;
      task.classes.push_back(static_cast<int>(c));
      const auto& xs = per_class[c];
      const std::size_t n_train = train_count(xs.size(), cfg.train_fraction);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        Example e{xs[i], static_cast<int>(c), task.id};
        (i < n_train ? task.train : task.test).push_back(std::move(e));
      }
    }
  }
  return tasks;
}

std::vector<TaskSpec> make_synthetic_stream(const StreamConfig& cfg) {
  cfg.validate();
  if (cfg.source != StreamSource::kSynthetic) throw ConfigError("make_synthetic_stream: source is not synthetic");
  Rng rng = Rng::derive(cfg.seed, kStreamSalt);
  const std::size_t classes = cfg.total_classes();

  std::vector<std::vector<double>> means(classes, std::vector<double>(cfg.input_dim));
  // Scaled so that E|mean_c|² = separation², independent of input_dim.
  const double mean_scale = cfg.separation / std::sqrt(static_cast<double>(cfg.input_dim));
  for (auto& mean : means) {
    for (double& v : mean) v = mean_scale * rng.normal();
  }
  std::vector<std::vector<std::vector<double>>> per_class(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    per_class[c].reserve(cfg.examples_per_class);
    for (std::size_t i = 0; i < cfg.examples_per_class; ++i) {
      std::vector<double> x = means[c];
      for (double& v : x) v += cfg.noise_scale * rng.normal();
      per_class[c].push_back(std::move(x));
    }
  }
  return partition_tasks(per_class, cfg);
}

IdxDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_bytes(images);
  const auto lab = read_bytes(labels);

  if (read_be32(img, 0, "idx images") != kIdxImagesMagic) throw FormatError("idx images: bad magic number", 0);
  if (read_be32(lab, 0, "idx labels") != kIdxLabelsMagic) throw FormatError("idx labels: bad magic number", 0);

  IdxDataset out;
  const std::size_t count = read_be32(img, 4, "idx images");
  out.rows = read_be32(img, 8, "idx images");
  out.cols = read_be32(img, 12, "idx images");
  const std::size_t label_count = read_be32(lab, 4, "idx labels");
  if (label_count != count) {
    throw FormatError("idx: label file holds " + std::to_string(label_count) + " labels for " +
                          std::to_string(count) + " images",
                      4);
  }

  const std::size_t pixels = out.rows * out.cols;
  constexpr std::size_t kImageHeader = 16, kLabelHeader = 8;
  if (img.size() < kImageHeader + count * pixels) {
    throw FormatError("idx images: truncated pixel data", img.size());
  }
  if (lab.size() < kLabelHeader + count) throw FormatError("idx labels: truncated label data", lab.size());
  if (img.size() != kImageHeader + count * pixels) {
    throw FormatError("idx images: trailing bytes", kImageHeader + count * pixels);
  }
  if (lab.size() != kLabelHeader + count) throw FormatError("idx labels: trailing bytes", kLabelHeader + count);

  out.images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> x(pixels);
    const std::uint8_t* src = img.data() + kImageHeader + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) x[p] = static_cast<double>(src[p]) / 255.0;
    out.images.push_back(std::move(x));
    out.labels.push_back(lab[kLabelHeader + i]);
  }
  return out;
}

std::vector<TaskSpec> load_idx_stream(const std::filesystem::path& images, const std::filesystem::path& labels,
                                      const StreamConfig& cfg) {
  IdxDataset data = read_idx(images, labels);
  std::vector<std::vector<std::vector<double>>> per_class(cfg.total_classes());
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const auto label = static_cast<std::size_t>(data.labels[i]);
    if (label < per_class.size()) per_class[label].push_back(std::move(data.images[i]));
  }
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].empty()) throw ConfigError("idx stream: no examples of class " + std::to_string(c));
  }
  return partition_tasks(per_class, cfg);
}

std::vector<TaskSpec> load_csv_stream(const std::filesystem::path& path, const StreamConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw FormatError("csv: missing header", 0);
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "label") throw FormatError("csv: header must start with 'label'", 0);
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "f" + std::to_string(i - 1)) throw FormatError("csv: unexpected column '" + header[i] + "'", 0);
  }
  const std::size_t dim = header.size() - 1;
  offset += line.size() + 1;

  std::vector<std::vector<std::vector<double>>> per_class(cfg.total_classes());
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != dim + 1) {
      throw FormatError("csv: row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(dim + 1),
                        offset);
    }
    int label = 0;
    std::vector<double> x(dim);
    try {
      const double lv = parse_double(fields[0]);
      label = static_cast<int>(lv);
      if (lv != label || label < 0) throw FormatError("bad label", 0);
      for (std::size_t i = 0; i < dim; ++i) x[i] = parse_double(fields[i + 1]);
    } catch (const FormatError&) {
      throw FormatError("csv: malformed row", offset);
    }
    if (static_cast<std::size_t>(label) < per_class.size()) per_class[label].push_back(std::move(x));
    offset += line.size() + 1;
  }
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].empty()) throw ConfigError("csv stream: no examples of class " + std::to_string(c));
  }
  return partition_tasks(per_class, cfg);
}

void write_csv_stream(const std::filesystem::path& path, const std::vector<TaskSpec>& tasks) {
  if (tasks.empty() || (tasks[0].train.empty() && tasks[0].test.empty())) {
    throw UsageError("write_csv_stream: nothing to write");
  }
  const std::size_t dim = tasks[0].train.empty() ? tasks[0].test[0].x.size() : tasks[0].train[0].x.size();
  std::string text = "label";
  for (std::size_t i = 0; i < dim; ++i) text += ",f" + std::to_string(i);
  text += '\n';
  auto emit = [&](const Example& e) {
    text += std::to_string(e.label);
    for (double v : e.x) {
      text += ',';
      text += format_double(v);
    }
    text += '\n';
  };
  for (const TaskSpec& task : tasks) {
    for (int c : task.classes) {
      for (const Example& e : task.train) {
        if (e.label == c) emit(e);
      }
      for (const Example& e : task.test) {
        if (e.label == c) emit(e);
      }
    }
  }
  write_text_file(path, text);
}

std::vector<TaskSpec> build_stream(const StreamConfig& cfg) {
  cfg.validate();
  switch (cfg.source) {
    case StreamSource::kSynthetic: return make_synthetic_stream(cfg);
    case StreamSource::kIdx: return load_idx_stream(cfg.idx_images, cfg.idx_labels, cfg);
    case StreamSource::kCsv: return load_csv_stream(cfg.csv_path, cfg);
  }
  throw ConfigError("unknown stream source");
}

std::vector<std::vector<Example>> batches(const TaskSpec& task, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ConfigError("batches: batch_size must be positive");
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<Example>> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    std::vector<Example> chunk;
    chunk.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) chunk.push_back(task.train[order[i]]);
    out.push_back(std::move(chunk));
  }
  return out;
}

}  // namespace strata
