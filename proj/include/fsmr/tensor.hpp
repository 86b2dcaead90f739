// Copyright 2026 The FSMR Authors
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

namespace fsmr {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// Every operation in the library works on rank-2 tensors; a vector of
/// length d is a 1 x d row. Zero-sized dimensions are allowed so that an
/// empty token list can map to a 0 x d matrix.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor row(std::initializer_list<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rank-1 tensors are viewed as a single row.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }
  std::vector<double>& storage() noexcept { return data_; }

  bool requires_grad() const noexcept { return requires_grad_; }
  Tensor& set_requires_grad(bool on) noexcept {
    requires_grad_ = on;
    return *this;
  }

  void fill(double v);
  bool all_finite() const noexcept;
  double item() const;

  /// Exact equality of shape and every value (bit pattern for non-NaN).
  bool operator==(const Tensor& other) const noexcept {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace fsmr
