// Copyright 2026 The divclust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace divclust {

// Dense row-major matrix of doubles. No validation beyond shape.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  const double* data() const noexcept { return values_.data(); }
  double* data() noexcept { return values_.data(); }
  const std::vector<double>& values() const noexcept { return values_; }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// The universal clustering input: n >= 1 samples of d >= 1 finite features,
// with optional small-integer class labels (ground truth, never used by fit).
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix values, std::optional<std::vector<int>> labels = std::nullopt);

  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows,
                              std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }
  std::span<const double> row(std::size_t r) const { return values_.row(r); }

  const Matrix& matrix() const noexcept { return values_; }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  void set_labels(std::optional<std::vector<int>> labels);

 private:
  Matrix values_;
  std::optional<std::vector<int>> labels_;
};

// Identity index list 0..n-1.
std::vector<std::size_t> iota_indices(std::size_t n);

}  // namespace divclust
