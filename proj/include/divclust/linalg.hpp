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
#include <string>
#include <string_view>
#include <vector>

#include "divclust/matrix.hpp"

namespace divclust::linalg {

/// A principal direction: unit vector plus its singular value (or eigenvalue,
/// for symmetric operators). The largest-magnitude component is nonnegative.
struct Direction {
  std::vector<double> vector;
  double magnitude = 0.0;
};

/// Power-iteration stopping rule. `tol` bounds 1 - |<v_k, v_{k-1}>|.
struct PowerOptions {
  double tol = 1e-9;
  std::size_t max_iter = 1000;
};

struct CenteredColumns {
  Matrix centered;
  std::vector<double> mean;
};

CenteredColumns center_columns(const Matrix& x);
CenteredColumns center_columns(const DataMatrix& x);

std::vector<double> column_means(const Matrix& data, std::span<const std::size_t> rows);

/// Flips `v` in place so that its largest-magnitude entry (first on ties) is >= 0.
void apply_sign_convention(std::span<double> v);

/// Rows of a larger matrix, centered implicitly around `mean` so no copy of
/// the node data is ever made. This is the operator every projection runs on.
class CenteredRows {
 public:
  CenteredRows(const Matrix& data, std::span<const std::size_t> rows, std::vector<double> mean);

  /// Centers around the rows' own column means.
  static CenteredRows around_mean(const Matrix& data, std::span<const std::size_t> rows);
  /// All rows of `data`, taken as already centered.
  static CenteredRows precentered(const Matrix& data);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return data_->cols(); }
  std::span<const double> raw_row(std::size_t i) const { return data_->row(rows_[i]); }
  std::span<const std::size_t> indices() const noexcept { return rows_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const Matrix& data() const noexcept { return *data_; }

  /// y = (X - 1 mean^T) v
  void apply(std::span<const double> v, std::span<double> y) const;
  /// z = (X - 1 mean^T)^T y
  void apply_transpose(std::span<const double> y, std::span<double> z) const;

  /// Total squared deviation from `mean` (the node scatter).
  double scatter() const;
  /// True when every centered entry is negligible relative to the data scale.
  bool negligible_spread() const;

 private:
  const Matrix* data_;
  std::vector<std::size_t> rows_;
  std::vector<double> mean_;
};

/// Dominant right singular direction of a column-centered matrix.
/// Throws kZeroVariance for an all-zero matrix and ConvergenceError (with the
/// last iterate) when max_iter is exhausted.
Direction leading_singular_direction(const Matrix& xc, PowerOptions options = {});
Direction leading_singular_direction(const CenteredRows& xc, PowerOptions options = {});

/// Dominant direction after deflating `first`; re-orthogonalized every step.
Direction secondary_direction(const Matrix& xc, const Direction& first, PowerOptions options = {});
Direction secondary_direction(const CenteredRows& xc, const Direction& first,
                              PowerOptions options = {});

/// Dominant eigenpair of a symmetric matrix restricted to the orthogonal
/// complement of `deflate`. magnitude is the Rayleigh quotient.
Direction dominant_eigenvector(const Matrix& sym, std::span<const std::vector<double>> deflate,
                               PowerOptions options = {});

enum class KernelType { kLinear, kRbf, kPolynomial, kSigmoid };

std::string_view to_string(KernelType type);
KernelType parse_kernel_type(std::string_view name);

/// Kernel choice. An absent gamma resolves to 1/d at use time.
struct KernelSpec {
  KernelType type = KernelType::kRbf;
  std::optional<double> gamma;
  int degree = 3;
  double coef0 = 1.0;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

void validate(const KernelSpec& spec);

/// A kernel with every default filled in for a given feature count.
struct ResolvedKernel {
  KernelType type = KernelType::kRbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 1.0;

  static ResolvedKernel resolve(const KernelSpec& spec, std::size_t dims);
  double operator()(std::span<const double> a, std::span<const double> b) const;
};

Matrix gram_matrix(const Matrix& x, const KernelSpec& kernel);
Matrix gram_matrix(const Matrix& data, std::span<const std::size_t> rows,
                   const ResolvedKernel& kernel);

struct CenteredGram {
  Matrix centered;
  std::vector<double> row_means;
  double total_mean = 0.0;
};

/// Double centering, keeping the statistics needed to center out-of-sample
/// kernel rows the same way.
CenteredGram center_gram_with_stats(const Matrix& k);
Matrix center_gram(const Matrix& k);

/// Centers one kernel row k(x, x_j) against the training statistics. The
/// arithmetic matches center_gram_with_stats entry for entry.
void center_kernel_row(std::span<double> k_row, const CenteredGram& stats);
void center_kernel_row(std::span<double> k_row, std::span<const double> row_means,
                       double total_mean);

}  // namespace divclust::linalg
