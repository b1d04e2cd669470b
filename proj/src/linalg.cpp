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

#include "divclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "divclust/error.hpp"
#include "divclust/simd.hpp"

namespace divclust::linalg {
namespace {

using Operator = std::function<void(std::span<const double>, std::span<double>)>;

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

void orthogonalize(std::span<double> v, std::span<const std::vector<double>> against) {
  for (const auto& u : against) {
    simd::axpy(-simd::dot(v, u), u, v);
  }
}

struct PowerResult {
  std::vector<double> vector;
  double rayleigh = 0.0;
};

// Power iteration on a PSD operator restricted to the complement of `against`.
// `scale` is the operator's trace (or any upper bound of its top eigenvalue);
// an image smaller than 1e-14 * scale counts as a stall.
PowerResult power_iterate(std::size_t dim, const Operator& op,
                          std::span<const std::vector<double>> against, double scale,
                          const PowerOptions& options, const char* what) {
  require(options.tol > 0.0, ErrorCode::kConfig, "power iteration tol must be positive");
  require(options.max_iter >= 1, ErrorCode::kConfig, "power iteration max_iter must be >= 1");
  const double stall = 1e-14 * scale;
  std::vector<double> v(dim, 1.0);
  std::vector<double> w(dim);

  const std::size_t max_restarts = std::min<std::size_t>(dim, 4) + 1;
  for (std::size_t attempt = 0; attempt < max_restarts; ++attempt) {
    if (attempt > 0) v[(attempt - 1) % dim] += 1e-3;
    std::vector<double> current = v;
    orthogonalize(current, against);
    double n0 = norm(current);
    if (n0 <= 1e-300) continue;
    simd::scale(1.0 / n0, current);

    bool stalled = false;
    double image_norm = 0.0;
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
      op(current, w);
      orthogonalize(w, against);
      image_norm = norm(w);
      if (!(image_norm > stall)) {
        stalled = true;
        break;
      }
      simd::scale(1.0 / image_norm, w);
      // 1 - |<w, current>| for unit vectors, evaluated as |w - s current|^2 / 2
      // so it does not cancel once the iterates agree to sqrt(eps).
      const double sign = simd::dot(w, current) < 0.0 ? -1.0 : 1.0;
      double change = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = w[i] - sign * current[i];
        change += d * d;
      }
      change *= 0.5;
      current.swap(w);
      if (change < options.tol) {
        op(current, w);
        PowerResult result{current, simd::dot(current, w)};
        apply_sign_convention(result.vector);
        return result;
      }
    }
    if (stalled) continue;
    apply_sign_convention(current);
    throw ConvergenceError(std::string(what) + ": no convergence after " +
                               std::to_string(options.max_iter) + " iterations",
                           current, image_norm);
  }
  fail(ErrorCode::kZeroVariance, std::string(what) + ": operator annihilates every start vector");
}

Operator normal_operator(const CenteredRows& xc, std::vector<double>& scratch) {
  scratch.assign(xc.rows(), 0.0);
  return [&xc, &scratch](std::span<const double> v, std::span<double> out) {
    xc.apply(v, scratch);
    xc.apply_transpose(scratch, out);
  };
}

double singular_value(const CenteredRows& xc, std::span<const double> v) {
  std::vector<double> y(xc.rows());
  xc.apply(v, y);
  return norm(y);
}

}  // namespace

CenteredColumns center_columns(const Matrix& x) {
  for (double value : x.values()) {
    require(std::isfinite(value), ErrorCode::kData, "center_columns: non-finite input");
  }
  CenteredColumns out{x, column_means(x, iota_indices(x.rows()))};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    simd::axpy(-1.0, out.mean, out.centered.row(i));
  }
  return out;
}

CenteredColumns center_columns(const DataMatrix& x) { return center_columns(x.matrix()); }

std::vector<double> column_means(const Matrix& data, std::span<const std::size_t> rows) {
  std::vector<double> mean(data.cols(), 0.0);
  if (rows.empty()) return mean;
  for (std::size_t r : rows) simd::axpy(1.0, data.row(r), mean);
  simd::scale(1.0 / static_cast<double>(rows.size()), mean);
  return mean;
}

void apply_sign_convention(std::span<double> v) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i]) > best_abs) {
      best_abs = std::fabs(v[i]);
      best = i;
    }
  }
  if (!v.empty() && v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

CenteredRows::CenteredRows(const Matrix& data, std::span<const std::size_t> rows,
                           std::vector<double> mean)
    : data_(&data), rows_(rows.begin(), rows.end()), mean_(std::move(mean)) {
  require(mean_.size() == data.cols(), ErrorCode::kShape, "centering mean has wrong length");
}

CenteredRows CenteredRows::around_mean(const Matrix& data, std::span<const std::size_t> rows) {
  return CenteredRows(data, rows, column_means(data, rows));
}

CenteredRows CenteredRows::precentered(const Matrix& data) {
  CenteredRows out(data, {}, std::vector<double>(data.cols(), 0.0));
  out.rows_ = iota_indices(data.rows());
  return out;
}

void CenteredRows::apply(std::span<const double> v, std::span<double> y) const {
  const double shift = simd::dot(mean_, v);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    y[i] = simd::dot(data_->row(rows_[i]), v) - shift;
  }
}

void CenteredRows::apply_transpose(std::span<const double> y, std::span<double> z) const {
  std::fill(z.begin(), z.end(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    simd::axpy(y[i], data_->row(rows_[i]), z);
    total += y[i];
  }
  simd::axpy(-total, mean_, z);
}

double CenteredRows::scatter() const {
  double acc = 0.0;
  for (std::size_t r : rows_) acc += simd::sqdist(data_->row(r), mean_);
  return acc;
}

bool CenteredRows::negligible_spread() const {
  double scale = 0.0;
  double spread = 0.0;
  for (std::size_t r : rows_) {
    const auto row = data_->row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      scale = std::max(scale, std::fabs(row[j]));
      spread = std::max(spread, std::fabs(row[j] - mean_[j]));
    }
  }
  return spread <= 1e-12 * scale || spread == 0.0;
}

Direction leading_singular_direction(const Matrix& xc, PowerOptions options) {
  return leading_singular_direction(CenteredRows::precentered(xc), options);
}

Direction leading_singular_direction(const CenteredRows& xc, PowerOptions options) {
  require(xc.rows() >= 1 && xc.cols() >= 1, ErrorCode::kShape, "empty matrix");
  if (xc.negligible_spread()) {
    fail(ErrorCode::kZeroVariance, "leading_singular_direction: zero-variance data");
  }
  std::vector<double> scratch;
  const Operator op = normal_operator(xc, scratch);
  try {
    PowerResult result = power_iterate(xc.cols(), op, {}, xc.scatter(), options,
                                       "leading_singular_direction");
    const double sigma = singular_value(xc, result.vector);
    return {std::move(result.vector), sigma};
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(e.what(), e.last_iterate(), singular_value(xc, e.last_iterate()));
  }
}

Direction secondary_direction(const Matrix& xc, const Direction& first, PowerOptions options) {
  return secondary_direction(CenteredRows::precentered(xc), first, options);
}

Direction secondary_direction(const CenteredRows& xc, const Direction& first,
                              PowerOptions options) {
  require(first.vector.size() == xc.cols(), ErrorCode::kShape,
          "secondary_direction: first direction has wrong length");
  if (xc.negligible_spread()) {
    fail(ErrorCode::kZeroVariance, "secondary_direction: zero-variance data");
  }
  std::vector<double> scratch;
  const Operator op = normal_operator(xc, scratch);
  const std::vector<std::vector<double>> against{first.vector};
  const double first_sigma = first.magnitude > 0.0 ? first.magnitude : singular_value(xc, first.vector);
  PowerResult result;
  try {
    result = power_iterate(xc.cols(), op, against, xc.scatter(), options, "secondary_direction");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroVariance) {
      fail(ErrorCode::kZeroVariance, "secondary_direction: data has rank 1");
    }
    throw;
  }
  const double sigma = singular_value(xc, result.vector);
  if (sigma <= 1e-10 * first_sigma) {
    fail(ErrorCode::kZeroVariance, "secondary_direction: data has rank 1");
  }
  return {std::move(result.vector), sigma};
}

Direction dominant_eigenvector(const Matrix& sym, std::span<const std::vector<double>> deflate,
                               PowerOptions options) {
  require(sym.rows() == sym.cols() && sym.rows() >= 1, ErrorCode::kShape,
          "dominant_eigenvector: matrix must be square");
  const std::size_t n = sym.rows();
  double scale = 0.0;
  for (double value : sym.values()) scale = std::max(scale, std::fabs(value));
  if (scale == 0.0) fail(ErrorCode::kZeroVariance, "dominant_eigenvector: zero matrix");
  const Operator op = [&sym, n](std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = simd::dot(sym.row(i), v);
  };
  PowerResult result =
      power_iterate(n, op, deflate, scale * static_cast<double>(n), options, "dominant_eigenvector");
  return {std::move(result.vector), result.rayleigh};
}

std::string_view to_string(KernelType type) {
  switch (type) {
    case KernelType::kLinear: return "linear";
    case KernelType::kRbf: return "rbf";
    case KernelType::kPolynomial: return "polynomial";
    case KernelType::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

KernelType parse_kernel_type(std::string_view name) {
  if (name == "linear") return KernelType::kLinear;
  if (name == "rbf") return KernelType::kRbf;
  if (name == "polynomial" || name == "poly") return KernelType::kPolynomial;
  if (name == "sigmoid") return KernelType::kSigmoid;
  fail(ErrorCode::kConfig, "unknown kernel '" + std::string(name) + "'");
}

void validate(const KernelSpec& spec) {
  if (spec.gamma) {
    require(std::isfinite(*spec.gamma) && *spec.gamma > 0.0, ErrorCode::kConfig,
            "kernel gamma must be positive");
  }
  if (spec.type == KernelType::kPolynomial) {
    require(spec.degree >= 1, ErrorCode::kConfig, "polynomial kernel degree must be >= 1");
  }
  require(std::isfinite(spec.coef0), ErrorCode::kConfig, "kernel coef0 must be finite");
}

ResolvedKernel ResolvedKernel::resolve(const KernelSpec& spec, std::size_t dims) {
  validate(spec);
  ResolvedKernel k;
  k.type = spec.type;
  k.gamma = spec.gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(dims, 1)));
  k.degree = spec.degree;
  k.coef0 = spec.coef0;
  return k;
}

double ResolvedKernel::operator()(std::span<const double> a, std::span<const double> b) const {
  switch (type) {
    case KernelType::kLinear:
      return simd::dot(a, b);
    case KernelType::kRbf:
      return std::exp(-gamma * simd::sqdist(a, b));
    case KernelType::kPolynomial:
      return std::pow(gamma * simd::dot(a, b) + coef0, degree);
    case KernelType::kSigmoid:
      return std::tanh(gamma * simd::dot(a, b) + coef0);
  }
  return 0.0;
}

Matrix gram_matrix(const Matrix& x, const KernelSpec& kernel) {
  const auto rows = iota_indices(x.rows());
  return gram_matrix(x, rows, ResolvedKernel::resolve(kernel, x.cols()));
}

Matrix gram_matrix(const Matrix& data, std::span<const std::size_t> rows,
                   const ResolvedKernel& kernel) {
  const std::size_t n = rows.size();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.row(rows[i]);
    for (std::size_t j = i; j < n; ++j) {
      const double value = kernel(xi, data.row(rows[j]));
      k(i, j) = value;
      k(j, i) = value;
    }
  }
  return k;
}

CenteredGram center_gram_with_stats(const Matrix& k) {
  require(k.rows() == k.cols(), ErrorCode::kShape, "center_gram: matrix must be square");
  const std::size_t n = k.rows();
  CenteredGram out{k, std::vector<double>(n), 0.0};
  if (n == 0) return out;
  const auto count = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.row_means[i] = simd::sum(k.row(i)) / count;
  out.total_mean = simd::sum(out.row_means) / count;
  for (std::size_t i = 0; i < n; ++i) {
    center_kernel_row(out.centered.row(i), out.row_means, out.total_mean);
  }
  return out;
}

Matrix center_gram(const Matrix& k) { return center_gram_with_stats(k).centered; }

void center_kernel_row(std::span<double> k_row, const CenteredGram& stats) {
  center_kernel_row(k_row, stats.row_means, stats.total_mean);
}

void center_kernel_row(std::span<double> k_row, std::span<const double> row_means,
                       double total_mean) {
  require(k_row.size() == row_means.size(), ErrorCode::kShape, "kernel row has wrong length");
  const double own_mean = simd::sum(k_row) / static_cast<double>(k_row.size());
  for (std::size_t j = 0; j < k_row.size(); ++j) {
    k_row[j] = ((k_row[j] - own_mean) - row_means[j]) + total_mean;
  }
}

}  // namespace divclust::linalg
