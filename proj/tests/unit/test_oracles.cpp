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

// The oracles are checked against hand-computed values before anything
// else trusts them.

#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"

using doctest::Approx;

TEST_CASE("jacobi: 2x2 symmetric matrix") {
  // [[2,1],[1,2]] has eigenvalues 3 and 1 with vectors (1,1)/sqrt2 and (1,-1)/sqrt2.
  const auto e = oracle::jacobi({{2, 1}, {1, 2}});
  CHECK(e.values[0] == Approx(3.0));
  CHECK(e.values[1] == Approx(1.0));
  CHECK(oracle::abs_cosine(e.vectors[0], {1, 1}) == Approx(1.0));
  CHECK(oracle::abs_cosine(e.vectors[1], {1, -1}) == Approx(1.0));
}

TEST_CASE("jacobi: diagonal input sorts eigenvalues") {
  const auto e = oracle::jacobi({{1, 0, 0}, {0, 5, 0}, {0, 0, 3}});
  CHECK(e.values == std::vector<double>{5, 3, 1});
  CHECK(oracle::abs_cosine(e.vectors[0], {0, 1, 0}) == 1.0);
}

TEST_CASE("jacobi: reconstructs A v = lambda v on a 4x4") {
  const oracle::Dense a{{4, 1, -2, 2}, {1, 2, 0, 1}, {-2, 0, 3, -2}, {2, 1, -2, -1}};
  const auto e = oracle::jacobi(a);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      double av = 0;
      for (std::size_t j = 0; j < 4; ++j) av += a[i][j] * e.vectors[k][j];
      CHECK(av == Approx(e.values[k] * e.vectors[k][i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("exhaustive two-means") {
  const auto b = oracle::exhaustive_two_means({11, 0, 10, 1});
  REQUIRE(b.has_value());
  CHECK(b->last_left == 1);
  CHECK(b->split_point == 5.5);
  CHECK(b->within == Approx(1.0));
  CHECK_FALSE(oracle::exhaustive_two_means({2, 2, 2}).has_value());
}

TEST_CASE("percentile and silverman") {
  CHECK(oracle::percentile({1, 2, 3, 4}, 0.25) == Approx(1.75));
  // sd of {1,2,3,4} with ddof 1 is sqrt(5/3); IQR/1.34 = 1.5/1.34.
  const double expect = 0.9 * std::min(std::sqrt(5.0 / 3.0), 1.5 / 1.34) * std::pow(4.0, -0.2);
  CHECK(oracle::silverman({4, 1, 3, 2}) == Approx(expect));
}

TEST_CASE("kde scan finds the symmetric valley") {
  const auto v = oracle::kde_valley_scan({-5, -5.1, -4.9, 5, 5.1, 4.9});
  CHECK(v.found);
  CHECK(std::fabs(v.location) < v.cell);
  CHECK_FALSE(oracle::kde_valley_scan({0, 0.1, 0.2}).found);
}

TEST_CASE("nmi: hand example") {
  // MI = 0.2158, H(A) = ln 2, H(B) = 0.5623.
  CHECK(oracle::nmi({0, 0, 1, 1}, {0, 1, 1, 1}) == Approx(0.3437).epsilon(1e-3));
  CHECK(oracle::nmi({0, 0, 1}, {5, 5, 2}) == Approx(1.0));
  CHECK(oracle::nmi({0, 0, 0}, {0, 1, 2}) == 0.0);
}
