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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "divclust/linalg.hpp"
#include "divclust/split_rules.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace divclust;
using doctest::Approx;

namespace {

void check_partition_invariant(std::span<const double> scores, const split::SplitCandidate& c) {
  if (!c.feasible) return;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  CHECK(*lo < c.split_point);
  CHECK(c.split_point <= *hi);
  const auto left = std::count_if(scores.begin(), scores.end(), [&](double s) { return s < c.split_point; });
  CHECK(left > 0);
  CHECK(static_cast<std::size_t>(left) < scores.size());
}

}  // namespace

TEST_SUITE("kde") {
  TEST_CASE("single point density at its location") {
    const std::vector<double> p{0.0};
    CHECK(split::gaussian_density(p, 1.0, 0.0) == Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
    CHECK(split::gaussian_density(p, 1.0, 0.0) == Approx(0.398942).epsilon(1e-6));
  }

  TEST_CASE("symmetric points give a symmetric density") {
    const std::vector<double> p{-1.0, 1.0};
    const auto kde = split::kde_1d(p, 0.7);
    const std::size_t g = kde.grid.size();
    for (std::size_t i = 0; i < g; ++i) {
      CHECK(kde.grid[i] == Approx(-kde.grid[g - 1 - i]).epsilon(1e-12));
      CHECK(kde.densities[i] == Approx(kde.densities[g - 1 - i]).epsilon(1e-12));
    }
  }

  TEST_CASE("grid spans the padded range and densities integrate to about one") {
    const auto p = fixtures::normal_vector(50, 77);
    const auto kde = split::kde_1d(p, std::nullopt);
    CHECK(kde.grid.size() == split::kDefaultKdeGrid);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    CHECK(kde.grid.front() == Approx(*lo - 3 * kde.bandwidth));
    CHECK(kde.grid.back() == Approx(*hi + 3 * kde.bandwidth));
    double area = 0;
    for (std::size_t i = 1; i < kde.grid.size(); ++i) {
      CHECK(kde.grid[i] > kde.grid[i - 1]);
      area += 0.5 * (kde.densities[i] + kde.densities[i - 1]) * (kde.grid[i] - kde.grid[i - 1]);
    }
    CHECK(area >= 0.98);
    CHECK(area <= 1.005);
    for (double d : kde.densities) CHECK(d >= 0.0);
  }

  TEST_CASE("silverman bandwidth matches the independent formula") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto p = fixtures::normal_vector(30 + seed * 7, seed);
      CHECK(split::silverman_bandwidth(p) == Approx(oracle::silverman(p)).epsilon(1e-12));
    }
  }

  TEST_CASE("invalid grid and bandwidth") {
    const std::vector<double> p{1, 2, 3};
    CHECK(fixtures::error_code_of([&] { split::kde_1d(p, 1.0, 8); }) == ErrorCode::kConfig);
    CHECK(fixtures::error_code_of([&] { split::kde_1d(p, -1.0); }) == ErrorCode::kConfig);
  }
}

TEST_SUITE("depddp") {
  TEST_CASE("two tight groups are split in the gap") {
    const std::vector<double> s{-5.1, -4.9, -5.0, 4.9, 5.1, 5.0};
    const auto c = split::depddp_split(s);
    CHECK(c.feasible);
    CHECK(c.split_point > -4.0);
    CHECK(c.split_point < 4.0);
    CHECK(c.rule == split::Rule::kDepddp);
    const auto o = oracle::kde_valley_scan(s);
    REQUIRE(o.found);
    CHECK(std::fabs(o.location - c.split_point) <= o.cell);
  }

  TEST_CASE("identical scores are infeasible") {
    const std::vector<double> s(10, 3.0);
    CHECK_FALSE(split::depddp_split(s).feasible);
  }

  TEST_CASE("one Gaussian sample agrees with the grid-scan oracle") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      CAPTURE(seed);
      const auto s = fixtures::normal_vector(40, seed);
      const auto c = split::depddp_split(s);
      const auto o = oracle::kde_valley_scan(s);
      CHECK(c.feasible == o.found);
      if (c.feasible && o.found) CHECK(std::fabs(o.location - c.split_point) <= o.cell);
    }
  }

  TEST_CASE("criterion is the negated density at the valley") {
    const std::vector<double> s{0, 0.2, 0.1, 0.3, 6, 6.1, 6.2, 5.9, 3};
    const auto c = split::depddp_split(s);
    REQUIRE(c.feasible);
    const double h = split::silverman_bandwidth(s);
    CHECK(c.criterion == Approx(-split::gaussian_density(s, h, c.split_point)).epsilon(1e-10));
    check_partition_invariant(s, c);
  }

  TEST_CASE("a larger bandwidth scale removes shallow valleys") {
    const std::vector<double> s{0, 0.5, 1.0, 1.6, 2.0, 2.4, 3.0};
    const auto wide = split::depddp_split(s, 5.0);
    CHECK_FALSE(wide.feasible);
  }
}

TEST_SUITE("ipddp") {
  TEST_CASE("largest gap without trimming") {
    const std::vector<double> s{0, 1, 5, 6};
    const auto c = split::ipddp_split(s, 0.0);
    CHECK(c.feasible);
    CHECK(c.split_point == 3.0);
    CHECK(c.criterion == 4.0);
  }

  TEST_CASE("trimmed tails are ignored when searching") {
    const std::vector<double> s{0, 0.1, 0.2, 9, 9.1, 100};
    const auto c = split::ipddp_split(s, 1.0 / 6.0);
    CHECK(c.feasible);
    CHECK(c.split_point == Approx(4.6));
    CHECK(c.criterion == Approx(8.8));
  }

  TEST_CASE("constant scores") {
    const std::vector<double> s(5, 2.0);
    const auto c = split::ipddp_split(s, 0.1);
    CHECK_FALSE(c.feasible);
    CHECK(c.criterion == 0.0);
  }

  TEST_CASE("equal gaps resolve to the leftmost") {
    const std::vector<double> s{0, 2, 4};
    CHECK(split::ipddp_split(s, 0.0).split_point == 1.0);
  }

  TEST_CASE("criterion is translation invariant and scales with |a|") {
    const auto s = fixtures::random_vector(40, 9, -5, 5);
    const auto base = split::ipddp_split(s, 0.1);
    for (double a : {-3.0, 0.25, 7.0}) {
      std::vector<double> t(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) t[i] = a * s[i] + 11.0;
      const auto c = split::ipddp_split(t, 0.1);
      CHECK(c.criterion == Approx(std::fabs(a) * base.criterion).epsilon(1e-10));
      check_partition_invariant(t, c);
    }
  }

  TEST_CASE("trim fraction out of range") {
    const std::vector<double> s{1, 2, 3};
    CHECK(fixtures::error_code_of([&] { split::ipddp_split(s, 0.5); }) == ErrorCode::kConfig);
  }
}

TEST_SUITE("kmeans_1d") {
  TEST_CASE("symmetric pairs") {
    const std::vector<double> s{0, 1, 10, 11};
    const auto c = split::kmeans_1d_split(s);
    CHECK(c.feasible);
    CHECK(c.split_point == 5.5);
    CHECK(c.criterion == Approx(100.0));
  }

  TEST_CASE("all zeros") {
    const std::vector<double> s(4, 0.0);
    CHECK_FALSE(split::kmeans_1d_split(s).feasible);
  }

  TEST_CASE("the cut is the correctly rounded midpoint") {
    // lo + (hi - lo) / 2 rounds twice and lands one ulp above 2.344 here.
    const std::vector<double> s{-0.009, 4.697};
    CHECK(split::kmeans_1d_split(s).split_point == (-0.009 + 4.697) / 2);
    CHECK(split::ipddp_split(s, 0.0).split_point == (-0.009 + 4.697) / 2);
  }

  TEST_CASE("twenty scores match the exhaustive boundary oracle") {
    const auto s = fixtures::random_vector(20, 2024, -4, 4);
    const auto c = split::kmeans_1d_split(s);
    const auto o = oracle::exhaustive_two_means(s);
    REQUIRE(o.has_value());
    CHECK(c.split_point == o->split_point);
    CHECK(c.criterion == Approx(oracle::total_ss(s) - o->within).epsilon(1e-10));
    check_partition_invariant(s, c);
  }

  TEST_CASE("ties in the data never put a boundary between equal values") {
    const std::vector<double> s{1, 1, 1, 2, 2, 2, 9};
    const auto c = split::kmeans_1d_split(s);
    const auto o = oracle::exhaustive_two_means(s);
    CHECK(c.split_point == o->split_point);
  }
}

TEST_SUITE("pddp") {
  TEST_CASE("sign split with the node scatter as criterion") {
    const std::vector<double> s{-2, -1, 1, 2};
    const auto c = split::pddp_split(s, 17.5);
    CHECK(c.feasible);
    CHECK(c.split_point == 0.0);
    CHECK(c.criterion == 17.5);
  }

  TEST_CASE("one-sided scores are infeasible") {
    const std::vector<double> s{1, 2, 3};
    CHECK_FALSE(split::pddp_split(s, 1.0).feasible);
  }

  TEST_CASE("node scatter equals the Frobenius norm of the centered node") {
    const Matrix x = fixtures::random_matrix(30, 6, 55, -2, 9);
    const std::vector<std::size_t> rows{0, 2, 3, 5, 8, 13, 21, 29};
    Matrix sub(rows.size(), 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < 6; ++j) sub(i, j) = x(rows[i], j);
    }
    const Matrix c = fixtures::centered(sub);
    double frob = 0;
    for (double v : c.values()) frob += v * v;
    CHECK(linalg::CenteredRows::around_mean(x, rows).scatter() == Approx(frob).epsilon(1e-12));
    CHECK(std::fabs(linalg::CenteredRows::around_mean(x, rows).scatter() - frob) < 1e-8);
  }
}

TEST_SUITE("two_means") {
  TEST_CASE("two blobs are recovered and the inertia is the within-blob scatter") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.3);
    Matrix m(40, 3);
    for (std::size_t i = 0; i < 40; ++i) {
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = g(rng) + (i >= 20 && j == 1 ? 12.0 : 0.0);
    }
    const auto r = split::two_means(DataMatrix(m), 1, 3);
    CHECK(r.feasible);
    for (std::size_t i = 1; i < 20; ++i) CHECK(r.assignment[i] == r.assignment[0]);
    for (std::size_t i = 20; i < 40; ++i) CHECK(r.assignment[i] != r.assignment[0]);

    double within = 0;
    for (std::size_t blob = 0; blob < 2; ++blob) {
      std::vector<std::size_t> idx;
      for (std::size_t i = blob * 20; i < blob * 20 + 20; ++i) idx.push_back(i);
      within += linalg::CenteredRows::around_mean(m, idx).scatter();
    }
    CHECK(r.inertia == Approx(within).epsilon(1e-10));
  }

  TEST_CASE("identical points are infeasible with zero inertia") {
    const auto r = split::two_means(DataMatrix(Matrix(6, 2, 4.0)), 1, 2);
    CHECK_FALSE(r.feasible);
    CHECK(r.inertia == 0.0);
  }

  TEST_CASE("inertia never increases across Lloyd iterations") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = split::two_means(DataMatrix(fixtures::random_matrix(30, 2, seed)), seed, 1);
      REQUIRE_FALSE(r.inertia_trace.empty());
      for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
        CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("same seed, same result") {
    const auto x = DataMatrix(fixtures::random_matrix(50, 4, 8));
    const auto a = split::two_means(x, 42, 3);
    const auto b = split::two_means(x, 42, 3);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
  }
}

TEST_CASE("rule names round-trip") {
  for (auto r : {split::Rule::kPddp, split::Rule::kDepddp, split::Rule::kIpddp, split::Rule::kKmeans1d,
                 split::Rule::kTwoMeans, split::Rule::kManual}) {
    CHECK(split::parse_rule(split::to_string(r)) == r);
  }
}
