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

#include "divclust/matrix.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "divclust/error.hpp"

namespace divclust {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kData: return "data";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kZeroVariance: return "zero_variance";
    case ErrorCode::kRank: return "rank";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kDegenerateSplit: return "degenerate_split";
    case ErrorCode::kStructural: return "structural";
    case ErrorCode::kCapacity: return "capacity";
  }
  return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(values_.size() == rows_ * cols_, ErrorCode::kShape,
          "matrix value count " + std::to_string(values_.size()) + " != " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    require(rows[i].size() == d, ErrorCode::kShape,
            "ragged row " + std::to_string(i + 1) + ": expected " + std::to_string(d) +
                " values, got " + std::to_string(rows[i].size()));
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return Matrix(n, d, std::move(values));
}

DataMatrix::DataMatrix(Matrix values, std::optional<std::vector<int>> labels)
    : values_(std::move(values)) {
  require(values_.rows() >= 1 && values_.cols() >= 1, ErrorCode::kData,
          "data matrix needs at least one sample and one feature");
  const auto& v = values_.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) {
      fail(ErrorCode::kData, "non-finite value at row " + std::to_string(k / values_.cols() + 1) +
                                 ", column " + std::to_string(k % values_.cols() + 1));
    }
  }
  set_labels(std::move(labels));
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::vector<int>> labels) {
  return DataMatrix(Matrix::from_rows(rows), std::move(labels));
}

void DataMatrix::set_labels(std::optional<std::vector<int>> labels) {
  if (labels) {
    require(labels->size() == rows(), ErrorCode::kShape,
            "label count " + std::to_string(labels->size()) + " != sample count " +
                std::to_string(rows()));
  }
  labels_ = std::move(labels);
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace divclust
