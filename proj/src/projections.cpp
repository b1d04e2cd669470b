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

#include "divclust/projections.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "divclust/error.hpp"
#include "divclust/prng.hpp"
#include "divclust/simd.hpp"

namespace divclust::proj {
namespace {

constexpr double kIcaTolerance = 1e-4;
constexpr std::size_t kIcaMaxIter = 200;

void check_node(const Matrix& data, std::span<const std::size_t> rows, int components) {
  require(components == 1 || components == 2, ErrorCode::kConfig,
          "projection components must be 1 or 2");
  require(rows.size() >= 2, ErrorCode::kZeroVariance, "projection needs at least 2 samples");
  for (std::size_t r : rows) {
    require(r < data.rows(), ErrorCode::kShape, "row index out of range");
  }
}

// A direction even when power iteration ran out of iterations: the last
// iterate still has near-maximal variance, which is all a split needs.
linalg::Direction leading_or_last(const linalg::CenteredRows& xc,
                                  const linalg::PowerOptions& power) {
  try {
    return linalg::leading_singular_direction(xc, power);
  } catch (const ConvergenceError& e) {
    return {e.last_iterate(), e.last_magnitude()};
  }
}

std::optional<linalg::Direction> secondary_or_none(const linalg::CenteredRows& xc,
                                                   const linalg::Direction& first,
                                                   const linalg::PowerOptions& power) {
  try {
    return linalg::secondary_direction(xc, first, power);
  } catch (const ConvergenceError& e) {
    return linalg::Direction{e.last_iterate(), e.last_magnitude()};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroVariance) return std::nullopt;
    throw;
  }
}

std::optional<linalg::Direction> eigen_or_none(const Matrix& sym,
                                               std::span<const std::vector<double>> deflate,
                                               const linalg::PowerOptions& power,
                                               double floor) {
  linalg::Direction d;
  try {
    d = linalg::dominant_eigenvector(sym, deflate, power);
  } catch (const ConvergenceError& e) {
    std::vector<double> image(sym.rows());
    for (std::size_t i = 0; i < sym.rows(); ++i) image[i] = simd::dot(sym.row(i), e.last_iterate());
    d = {e.last_iterate(), simd::dot(image, e.last_iterate())};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroVariance) return std::nullopt;
    throw;
  }
  if (!(d.magnitude > floor)) return std::nullopt;
  return d;
}

LinearAxis linear_axis(std::vector<double> axis, std::span<const double> mean) {
  LinearAxis out{std::move(axis), 0.0};
  out.offset = simd::dot(out.axis, mean);
  return out;
}

void fill_scores(ProjectionResult& result, const Matrix& data, std::span<const std::size_t> rows) {
  result.scores = Matrix(rows.size(), result.axes.size());
  for (std::size_t c = 0; c < result.axes.size(); ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      result.scores(i, c) = score(result.axes[c], data.row(rows[i]), data);
    }
  }
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kPca: return "pca";
    case Method::kKpca: return "kpca";
    case Method::kIca: return "ica";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "pca") return Method::kPca;
  if (name == "kpca") return Method::kKpca;
  if (name == "ica") return Method::kIca;
  fail(ErrorCode::kConfig, "unknown projection '" + std::string(name) + "'");
}

void validate(const ProjectionConfig& config) {
  require(config.components == 1 || config.components == 2, ErrorCode::kConfig,
          "projection components must be 1 or 2");
  require(config.kpca_max_samples >= 2, ErrorCode::kConfig, "kpca_max_samples must be >= 2");
  require(config.power.tol > 0.0 && config.power.max_iter >= 1, ErrorCode::kConfig,
          "invalid power-iteration options");
  if (config.method == Method::kKpca) linalg::validate(config.kernel);
}

double score(const AxisModel& model, std::span<const double> x, const Matrix& reference) {
  struct Visitor {
    std::span<const double> x;
    const Matrix& reference;

    double operator()(const LinearAxis& m) const {
      require(m.axis.size() == x.size(), ErrorCode::kShape, "sample has wrong feature count");
      return simd::dot(m.axis, x) - m.offset;
    }
    double operator()(const KernelAxis& m) const {
      require(reference.cols() == x.size(), ErrorCode::kShape, "sample has wrong feature count");
      std::vector<double> k_row(m.reference_rows.size());
      for (std::size_t j = 0; j < k_row.size(); ++j) {
        k_row[j] = m.kernel(x, reference.row(m.reference_rows[j]));
      }
      linalg::center_kernel_row(k_row, m.row_means, m.total_mean);
      return simd::dot(k_row, m.coefficients);
    }
    double operator()(const CentroidAxis& m) const {
      require(m.left_center.size() == x.size(), ErrorCode::kShape,
              "sample has wrong feature count");
      return simd::sqdist(x, m.left_center) - simd::sqdist(x, m.right_center);
    }
  };
  return std::visit(Visitor{x, reference}, model);
}

std::vector<double> ProjectionResult::column(std::size_t c) const {
  std::vector<double> out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) out[i] = scores(i, c);
  return out;
}

ProjectionResult project_pca(const Matrix& data, std::span<const std::size_t> rows,
                             int components, const linalg::PowerOptions& power) {
  check_node(data, rows, components);
  const auto xc = linalg::CenteredRows::around_mean(data, rows);
  linalg::Direction first = leading_or_last(xc, power);

  ProjectionResult result;
  result.method = Method::kPca;
  result.axes.emplace_back(linear_axis(first.vector, xc.mean()));
  if (components == 2) {
    auto second = secondary_or_none(xc, first, power);
    if (second) {
      result.axes.emplace_back(linear_axis(std::move(second->vector), xc.mean()));
    } else {
      result.axes.emplace_back(LinearAxis{std::vector<double>(data.cols(), 0.0), 0.0});
    }
  }
  fill_scores(result, data, rows);
  return result;
}

ProjectionResult project_kpca(const Matrix& data, std::span<const std::size_t> rows,
                              const linalg::KernelSpec& kernel, int components,
                              std::size_t max_samples, const linalg::PowerOptions& power) {
  check_node(data, rows, components);
  require(rows.size() <= max_samples, ErrorCode::kCapacity,
          "kernel PCA refuses a node of " + std::to_string(rows.size()) +
              " samples (limit " + std::to_string(max_samples) + ")");
  const auto resolved = linalg::ResolvedKernel::resolve(kernel, data.cols());
  const Matrix gram = linalg::gram_matrix(data, rows, resolved);
  const linalg::CenteredGram centered = linalg::center_gram_with_stats(gram);

  double gram_scale = 0.0;
  double centered_scale = 0.0;
  for (double v : gram.values()) gram_scale = std::max(gram_scale, std::fabs(v));
  for (double v : centered.centered.values()) centered_scale = std::max(centered_scale, std::fabs(v));
  if (!(centered_scale > 1e-12 * gram_scale)) {
    fail(ErrorCode::kZeroVariance, "kernel PCA: centered Gram matrix is numerically zero");
  }
  const double floor = 1e-12 * centered_scale * static_cast<double>(rows.size());

  std::vector<std::vector<double>> found;
  ProjectionResult result;
  result.method = Method::kKpca;
  result.scores = Matrix(rows.size(), static_cast<std::size_t>(components));
  for (int c = 0; c < components; ++c) {
    auto eig = eigen_or_none(centered.centered, found, power, floor);
    if (!eig) {
      if (c == 0) fail(ErrorCode::kZeroVariance, "kernel PCA: no positive spectrum");
      result.axes.emplace_back(LinearAxis{std::vector<double>(data.cols(), 0.0), 0.0});
      continue;
    }
    KernelAxis axis;
    axis.kernel = resolved;
    axis.reference_rows.assign(rows.begin(), rows.end());
    axis.coefficients = eig->vector;
    simd::scale(1.0 / std::sqrt(eig->magnitude), axis.coefficients);
    axis.row_means = centered.row_means;
    axis.total_mean = centered.total_mean;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      result.scores(i, c) = simd::dot(centered.centered.row(i), axis.coefficients);
    }
    found.push_back(std::move(eig->vector));
    result.axes.emplace_back(std::move(axis));
  }
  return result;
}

ProjectionResult project_ica(const Matrix& data, std::span<const std::size_t> rows,
                             int components, std::uint64_t seed,
                             const linalg::PowerOptions& power) {
  check_node(data, rows, components);
  const auto c = static_cast<std::size_t>(components);
  require(data.cols() >= c, ErrorCode::kRank,
          "ICA needs at least as many features as components");
  const auto xc = linalg::CenteredRows::around_mean(data, rows);
  const std::size_t n = rows.size();

  std::vector<std::vector<double>> basis;
  const linalg::Direction first = leading_or_last(xc, power);
  basis.push_back(first.vector);
  if (c == 2) {
    auto second = secondary_or_none(xc, first, power);
    require(second.has_value(), ErrorCode::kRank, "ICA whitening rank is below 2 components");
    basis.push_back(std::move(second->vector));
  }

  // Principal scores, then exact whitening by the Cholesky factor of their
  // sample covariance.
  Matrix y(n, c);
  for (std::size_t k = 0; k < c; ++k) {
    const double offset = simd::dot(basis[k], xc.mean());
    for (std::size_t i = 0; i < n; ++i) y(i, k) = simd::dot(basis[k], xc.raw_row(i)) - offset;
  }
  double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t b = 0; b < c; ++b) cov[a][b] += y(i, a) * y(i, b);
    }
  }
  for (auto& row : cov) {
    for (double& v : row) v /= static_cast<double>(n);
  }
  double white[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  require(cov[0][0] > 0.0, ErrorCode::kZeroVariance, "ICA: zero-variance node");
  const double l11 = std::sqrt(cov[0][0]);
  white[0][0] = 1.0 / l11;
  if (c == 2) {
    const double l21 = cov[1][0] / l11;
    const double rest = cov[1][1] - l21 * l21;
    require(rest > 1e-20 * cov[0][0], ErrorCode::kRank, "ICA whitening rank is below 2 components");
    const double l22 = std::sqrt(rest);
    white[1][0] = -l21 / (l11 * l22);
    white[1][1] = 1.0 / l22;
  }
  Matrix z(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < c; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < c; ++b) acc += white[a][b] * y(i, b);
      z(i, a) = acc;
    }
  }

  // Deflationary FastICA with g = tanh.
  SeededPrng rng(seed);
  std::vector<std::vector<double>> unmixing;
  std::vector<double> projected(n);
  for (std::size_t p = 0; p < c; ++p) {
    std::vector<double> w(c);
    for (double& v : w) v = rng.normal();
    auto orth_normalize = [&](std::vector<double>& v) {
      for (const auto& u : unmixing) {
        double d = 0.0;
        for (std::size_t k = 0; k < c; ++k) d += v[k] * u[k];
        for (std::size_t k = 0; k < c; ++k) v[k] -= d * u[k];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& x : v) x /= norm;
      }
      return norm;
    };
    if (orth_normalize(w) == 0.0) {
      w.assign(c, 0.0);
      w[p] = 1.0;
      orth_normalize(w);
    }
    for (std::size_t it = 0; it < kIcaMaxIter; ++it) {
      std::vector<double> next(c, 0.0);
      double mean_derivative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double u = 0.0;
        for (std::size_t k = 0; k < c; ++k) u += w[k] * z(i, k);
        const double g = std::tanh(u);
        mean_derivative += 1.0 - g * g;
        for (std::size_t k = 0; k < c; ++k) next[k] += z(i, k) * g;
      }
      for (std::size_t k = 0; k < c; ++k) {
        next[k] = next[k] / static_cast<double>(n) - mean_derivative / static_cast<double>(n) * w[k];
      }
      if (orth_normalize(next) == 0.0) break;
      double d = 0.0;
      for (std::size_t k = 0; k < c; ++k) d += next[k] * w[k];
      w = std::move(next);
      if (std::fabs(std::fabs(d) - 1.0) < kIcaTolerance) break;
    }
    unmixing.push_back(w);
  }

  ProjectionResult result;
  result.method = Method::kIca;
  for (std::size_t p = 0; p < c; ++p) {
    // Fold whitening and principal basis into one axis in feature space.
    std::vector<double> combined(c, 0.0);
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t b = 0; b < c; ++b) combined[b] += unmixing[p][a] * white[a][b];
    }
    std::vector<double> axis(data.cols(), 0.0);
    for (std::size_t b = 0; b < c; ++b) simd::axpy(combined[b], basis[b], axis);
    linalg::apply_sign_convention(axis);
    result.axes.emplace_back(linear_axis(std::move(axis), xc.mean()));
  }
  fill_scores(result, data, rows);
  return result;
}

ProjectionResult project_pca(const DataMatrix& x, int components) {
  const auto rows = iota_indices(x.rows());
  return project_pca(x.matrix(), rows, components);
}

ProjectionResult project_kpca(const DataMatrix& x, const linalg::KernelSpec& kernel,
                              int components) {
  const auto rows = iota_indices(x.rows());
  return project_kpca(x.matrix(), rows, kernel, components);
}

ProjectionResult project_ica(const DataMatrix& x, int components, std::uint64_t seed) {
  const auto rows = iota_indices(x.rows());
  return project_ica(x.matrix(), rows, components, seed);
}

ProjectionResult project(const Matrix& data, std::span<const std::size_t> rows,
                         const ProjectionConfig& config, std::uint64_t seed) {
  switch (config.method) {
    case Method::kPca:
      return project_pca(data, rows, config.components, config.power);
    case Method::kKpca:
      return project_kpca(data, rows, config.kernel, config.components, config.kpca_max_samples,
                          config.power);
    case Method::kIca:
      return project_ica(data, rows, config.components, seed, config.power);
  }
  fail(ErrorCode::kConfig, "unknown projection method");
}

}  // namespace divclust::proj
