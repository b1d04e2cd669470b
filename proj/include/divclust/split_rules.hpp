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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "divclust/matrix.hpp"

namespace divclust::split {

enum class Rule { kPddp, kDepddp, kIpddp, kKmeans1d, kTwoMeans, kManual };

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view name);

/// A proposed cut on a node's splitting axis. Samples with score < split_point
/// go left, the rest go right. Leaf selection maximizes `criterion`.
struct SplitCandidate {
  double split_point = 0.0;
  double criterion = 0.0;
  bool feasible = false;
  Rule rule = Rule::kPddp;
};

/// Gaussian KDE evaluated on an even grid over [min - 3h, max + 3h].
struct Kde1d {
  std::vector<double> points;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> densities;
};

inline constexpr std::size_t kDefaultKdeGrid = 512;

/// 0.9 * min(sd, IQR / 1.34) * m^(-1/5), floored at 1e-9 * range.
double silverman_bandwidth(std::span<const double> points);

/// `bandwidth` absent selects Silverman's rule; `bandwidth_scale` multiplies
/// whichever bandwidth is used.
Kde1d kde_1d(std::span<const double> points, std::optional<double> bandwidth,
             std::size_t grid_size = kDefaultKdeGrid, double bandwidth_scale = 1.0);

double gaussian_density(std::span<const double> points, double bandwidth, double x);

SplitCandidate pddp_split(std::span<const double> scores, double node_scatter);

SplitCandidate depddp_split(std::span<const double> scores, double bandwidth_scale = 1.0,
                            std::size_t grid_size = kDefaultKdeGrid);

SplitCandidate ipddp_split(std::span<const double> scores, double trim_fraction);

SplitCandidate kmeans_1d_split(std::span<const double> scores);

/// Outcome of bisecting k-means on a node.
struct TwoMeansResult {
  std::vector<bool> assignment;  // true = closer to right_center (ties included)
  std::vector<double> left_center;
  std::vector<double> right_center;
  double inertia = 0.0;
  bool feasible = false;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the winning restart
};

TwoMeansResult two_means(const Matrix& data, std::span<const std::size_t> rows,
                         std::uint64_t seed, std::size_t restarts,
                         std::size_t max_iter = 300);
TwoMeansResult two_means(const DataMatrix& x, std::uint64_t seed, std::size_t restarts);

}  // namespace divclust::split
