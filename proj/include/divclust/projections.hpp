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
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "divclust/linalg.hpp"
#include "divclust/matrix.hpp"

namespace divclust::proj {

enum class Method { kPca, kKpca, kIca };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct ProjectionConfig {
  Method method = Method::kPca;
  linalg::KernelSpec kernel;  // kpca only
  std::uint64_t seed = 0;     // ica only
  int components = 1;
  std::size_t kpca_max_samples = 20000;
  linalg::PowerOptions power;
};

void validate(const ProjectionConfig& config);

// score(x) = <axis, x> - offset. Used by PCA, ICA and the 2-means split.
struct LinearAxis {
  std::vector<double> axis;
  double offset = 0.0;
};

// score(x) = < doubly-centered k(x, reference), coefficients >.
struct KernelAxis {
  linalg::ResolvedKernel kernel;
  std::vector<std::size_t> reference_rows;
  std::vector<double> coefficients;
  std::vector<double> row_means;
  double total_mean = 0.0;
};

// score(x) = |x - left|^2 - |x - right|^2; nonnegative means "closer to right or tied".
struct CentroidAxis {
  std::vector<double> left_center;
  std::vector<double> right_center;
};

/// How one sample maps onto a node's splitting coordinate. Training scores go
/// through exactly the same arithmetic as out-of-sample scores, so routing a
/// training sample through a fitted tree reproduces its training side.
using AxisModel = std::variant<LinearAxis, KernelAxis, CentroidAxis>;

/// `reference` is the training matrix; only kernel axes read it.
double score(const AxisModel& model, std::span<const double> x, const Matrix& reference);

struct ProjectionResult {
  Method method = Method::kPca;
  Matrix scores;                // rows = node samples, cols = components; column 0 splits
  std::vector<AxisModel> axes;  // one per component

  std::vector<double> column(std::size_t c) const;
};

ProjectionResult project_pca(const Matrix& data, std::span<const std::size_t> rows,
                             int components, const linalg::PowerOptions& power = {});
ProjectionResult project_kpca(const Matrix& data, std::span<const std::size_t> rows,
                              const linalg::KernelSpec& kernel, int components,
                              std::size_t max_samples = 20000,
                              const linalg::PowerOptions& power = {});
ProjectionResult project_ica(const Matrix& data, std::span<const std::size_t> rows,
                             int components, std::uint64_t seed,
                             const linalg::PowerOptions& power = {});

ProjectionResult project_pca(const DataMatrix& x, int components);
ProjectionResult project_kpca(const DataMatrix& x, const linalg::KernelSpec& kernel,
                              int components);
ProjectionResult project_ica(const DataMatrix& x, int components, std::uint64_t seed);

/// Dispatches on config.method; `seed` overrides config.seed for ICA so each
/// node can draw from its own stream.
ProjectionResult project(const Matrix& data, std::span<const std::size_t> rows,
                         const ProjectionConfig& config, std::uint64_t seed);

}  // namespace divclust::proj
