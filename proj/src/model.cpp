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

#include "strata/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "strata/errors.hpp"
#include "strata/rng.hpp"

namespace strata {
namespace {

void check_architecture(std::size_t input_dim, const std::vector<std::size_t>& widths, std::size_t classes) {
  if (input_dim == 0) throw ConfigError("net: input dimension must be positive");
  if (widths.size() < 2) throw ConfigError("net: need at least 2 layers, got " + std::to_string(widths.size()));
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("net: layer widths must be positive");
  }
  if (classes < 2) throw ConfigError("net: need at least 2 classes, got " + std::to_string(classes));
}

}  // namespace

std::vector<Shape> LayeredNet::expected_shapes(std::size_t input_dim, const std::vector<std::size_t>& widths,
                                               std::size_t classes) {
  std::vector<Shape> shapes;
  std::size_t fan_in = input_dim;
  for (std::size_t w : widths) {
    shapes.push_back({fan_in, w});
    shapes.push_back({1, w});
    fan_in = w;
  }
  for (std::size_t w : widths) {
    shapes.push_back({w, classes});
    shapes.push_back({1, classes});
  }
  return shapes;
}

LayeredNet LayeredNet::init(std::size_t input_dim, std::vector<std::size_t> widths, std::size_t classes,
                            std::uint64_t seed) {
  check_architecture(input_dim, widths, classes);
  Rng rng(seed);
  std::vector<Tensor> params;
  for (const Shape& shape : expected_shapes(input_dim, widths, classes)) {
    Tensor t(shape);
    if (shape[0] != 1) {
      const double bound = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (double& v : t.values()) v = rng.uniform(-bound, bound);
    }
    params.push_back(std::move(t));
  }
  return LayeredNet(input_dim, std::move(widths), classes, std::move(params));
}

LayeredNet::LayeredNet(std::size_t input_dim, std::vector<std::size_t> widths, std::size_t classes,
                       std::vector<Tensor> params)
    : input_dim_(input_dim), widths_(std::move(widths)), classes_(classes), params_(std::move(params)) {
  check_architecture(input_dim_, widths_, classes_);
  const auto shapes = expected_shapes(input_dim_, widths_, classes_);
  if (shapes.size() != params_.size()) {
    throw DimensionError("net: expected " + std::to_string(shapes.size()) + " parameter tensors, got " +
                         std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params_[i].shape() != shapes[i]) {
      throw DimensionError("net: parameter " + std::to_string(i) + " has shape " + params_[i].shape_string() +
                           ", expected " + shape_string(shapes[i]));
    }
  }
}

std::vector<std::string> LayeredNet::parameter_names() const {
  std::vector<std::string> names;
  for (const char* part : {"block", "head"}) {
    for (std::size_t l = 0; l < layers(); ++l) {
      const std::string base = std::string(part) + std::to_string(l + 1);
      names.push_back(base + ".weight");
      names.push_back(base + ".bias");
    }
  }
  return names;
}

ForwardRecord forward(Tape& tape, const LayeredNet& net, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != net.input_dim()) {
    throw DimensionError("forward: input shape " + x.shape_string() + " does not match input width " +
                         std::to_string(net.input_dim()));
  }
  const auto& params = net.parameters();
  std::vector<Var> handles;
  handles.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) handles.push_back(tape.parameter(i, params[i]));

  ForwardRecord rec;
  Var h = tape.constant(x);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    h = tanh(add_row(matmul(h, handles[net.block_weight(l)]), handles[net.block_bias(l)]));
    rec.activations.push_back(h);
  }
  for (std::size_t l = 0; l < net.layers(); ++l) {
    Var logits = add_row(matmul(rec.activations[l], handles[net.head_weight(l)]), handles[net.head_bias(l)]);
    rec.logits.push_back(logits);
    rec.probs.push_back(softmax(logits));
  }
  return rec;
}

std::vector<Tensor> layer_logits(const LayeredNet& net, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != net.input_dim()) {
    throw DimensionError("layer_logits: input shape " + x.shape_string() + " does not match input width " +
                         std::to_string(net.input_dim()));
  }
  const auto& p = net.parameters();
  std::vector<Tensor> out;
  Tensor h = x;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    h = tanh(add_row(matmul(h, p[net.block_weight(l)]), p[net.block_bias(l)]));
    out.push_back(add_row(matmul(h, p[net.head_weight(l)]), p[net.head_bias(l)]));
  }
  return out;
}

std::vector<int> predict_layer(const LayeredNet& net, const Tensor& x, std::size_t layer) {
  if (layer >= net.layers()) {
    throw UsageError("predict_layer: layer " + std::to_string(layer) + " outside [0, " +
                     std::to_string(net.layers()) + ")");
  }
  // Argmax of logits equals argmax of softmax(logits) and avoids the exp.
  return argmax_rows(layer_logits(net, x)[layer]);
}

void save_checkpoint(const LayeredNet& net, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format"] = "strata-checkpoint";
  header["version"] = 1;
  header["input_dim"] = net.input_dim();
  header["widths"] = net.widths();
  header["classes"] = net.classes();
  header["layers"] = net.layers();
  header["dtype"] = "float64-le";
  auto& order = header["parameters"] = nlohmann::json::array();
  const auto names = net.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    order.push_back({{"name", names[i]}, {"shape", net.parameters()[i].shape()}});
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << header.dump() << '\n';
  for (const Tensor& t : net.parameters()) {
    for (double v : t.values()) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

LayeredNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("checkpoint: missing header line", 0);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint: bad header: ") + e.what(), e.byte);
  }
  if (header.value("format", "") != "strata-checkpoint") throw FormatError("checkpoint: unknown format", 0);

  const auto input_dim = header.at("input_dim").get<std::size_t>();
  auto widths = header.at("widths").get<std::vector<std::size_t>>();
  const auto classes = header.at("classes").get<std::size_t>();
  std::uint64_t offset = line.size() + 1;
  std::vector<Tensor> params;
  for (const auto& entry : header.at("parameters")) {
    Tensor t(entry.at("shape").get<Shape>());
    for (double& v : t.values()) {
      char bytes[8];
      if (!in.read(bytes, 8)) throw FormatError("checkpoint: truncated parameter data", offset);
      std::uint64_t bits;
      std::memcpy(&bits, bytes, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      v = std::bit_cast<double>(bits);
      offset += 8;
    }
    params.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes", offset);
  return LayeredNet(input_dim, std::move(widths), classes, std::move(params));
}

}  // namespace strata
