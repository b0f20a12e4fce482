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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace strata {

using Shape = std::vector<std::size_t>;

/// Clamp applied inside log-consuming operations (cross-entropy, entropy).
inline constexpr double kProbFloor = 1e-12;

/// Dense row-major array of doubles. A rank-0 tensor holds one value.
/// Zero-length dimensions are allowed so that an empty batch flows through
/// a network without special casing.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::span<const double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_scalar() const noexcept { return data_.size() == 1 && shape_.size() <= 1; }

  // 2-D accessors; throw DimensionError on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double item() const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row_values(std::size_t r) const;

  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::string shape_string(const Shape& shape);

// Value-level kernels. The tape wraps these; they are also used directly by
// evaluation paths that need no gradients.

/// a[m×k] · b[k×n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// aᵀ · b for a[k×m], b[k×n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a · bᵀ for a[m×k], b[n×k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// x[B×n] + bias[1×n] added to every row.
Tensor add_row(const Tensor& x, const Tensor& bias);
Tensor tanh(const Tensor& x);
/// Row-wise softmax with per-row max subtraction. Output is not clamped.
Tensor softmax(const Tensor& logits);
/// Stack the rows of two matrices with equal column counts.
Tensor concat_rows(const Tensor& top, const Tensor& bottom);
/// Per-row index of the maximum; ties go to the lowest index.
std::vector<int> argmax_rows(const Tensor& x);

}  // namespace strata
