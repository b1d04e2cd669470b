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

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "divclust/error.hpp"
#include "divclust/matrix.hpp"

namespace fixtures {

// Test data comes from the standard library engine so it is independent of
// the library's own generator.
inline divclust::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                      double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  divclust::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<double> normal_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline std::vector<std::vector<double>> to_dense(const divclust::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

inline divclust::Matrix centered(const divclust::Matrix& m) {
  divclust::Matrix out = m;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    long double s = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
    const double mean = static_cast<double>(s / m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) -= mean;
  }
  return out;
}

// Row r of the result is row perm[r] of the input.
inline divclust::DataMatrix permute_rows(const divclust::DataMatrix& x,
                                         const std::vector<std::size_t>& perm) {
  divclust::Matrix m(x.rows(), x.cols());
  std::optional<std::vector<int>> labels;
  if (x.labels()) labels.emplace(x.rows());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) m(r, c) = x(perm[r], c);
    if (labels) (*labels)[r] = (*x.labels())[perm[r]];
  }
  return divclust::DataMatrix(std::move(m), std::move(labels));
}

inline std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

template <typename F>
divclust::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const divclust::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a divclust::Error");
}

}  // namespace fixtures
