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

#include "divclust/split_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "divclust/error.hpp"
#include "divclust/prng.hpp"
#include "divclust/simd.hpp"

namespace divclust::split {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// A threshold t with lo < t <= hi, as close to the midpoint as doubles allow.
double cut_between(double lo, double hi) {
  const double mid = std::midpoint(lo, hi);
  return mid > lo ? mid : hi;
}

// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

// log of the KDE at x, stable when every kernel term underflows.
double log_density(std::span<const double> points, double h, double x) {
  double best = -std::numeric_limits<double>::infinity();
  for (double p : points) {
    const double u = (x - p) / h;
    best = std::max(best, -0.5 * u * u);
  }
  double acc = 0.0;
  for (double p : points) {
    const double u = (x - p) / h;
    acc += std::exp(-0.5 * u * u - best);
  }
  return best + std::log(acc * kInvSqrt2Pi / (static_cast<double>(points.size()) * h));
}

bool strictly_inside(std::span<const double> scores, double point) {
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return *lo < point && point < *hi;
}

}  // namespace

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kPddp: return "pddp";
    case Rule::kDepddp: return "depddp";
    case Rule::kIpddp: return "ipddp";
    case Rule::kKmeans1d: return "kmeans_1d";
    case Rule::kTwoMeans: return "two_means";
    case Rule::kManual: return "manual";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  for (Rule r : {Rule::kPddp, Rule::kDepddp, Rule::kIpddp, Rule::kKmeans1d, Rule::kTwoMeans,
                 Rule::kManual}) {
    if (to_string(r) == name) return r;
  }
  fail(ErrorCode::kData, "unknown split rule '" + std::string(name) + "'");
}

double silverman_bandwidth(std::span<const double> points) {
  require(!points.empty(), ErrorCode::kConfig, "bandwidth needs at least one point");
  const auto sorted = sorted_copy(points);
  const double m = static_cast<double>(points.size());
  const double range = sorted.back() - sorted.front();
  double sd = 0.0;
  if (points.size() >= 2) {
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / m;
    double ss = 0.0;
    for (double x : sorted) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / (m - 1.0));
  }
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  // A zero IQR (over half the mass tied) would collapse the bandwidth; fall back to sd.
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  double h = 0.9 * spread * std::pow(m, -0.2);
  h = std::max(h, 1e-9 * range);
  return h > 0.0 ? h : 1.0;
}

double gaussian_density(std::span<const double> points, double bandwidth, double x) {
  double acc = 0.0;
  for (double p : points) {
    const double u = (x - p) / bandwidth;
    acc += std::exp(-0.5 * u * u);
  }
  return acc * kInvSqrt2Pi / (static_cast<double>(points.size()) * bandwidth);
}

Kde1d kde_1d(std::span<const double> points, std::optional<double> bandwidth,
             std::size_t grid_size, double bandwidth_scale) {
  require(!points.empty(), ErrorCode::kConfig, "kde_1d needs at least one point");
  require(grid_size >= 16, ErrorCode::kConfig, "kde_1d grid_size must be >= 16");
  require(bandwidth_scale > 0.0 && std::isfinite(bandwidth_scale), ErrorCode::kConfig,
          "bandwidth_scale must be positive");
  if (bandwidth) {
    require(*bandwidth > 0.0 && std::isfinite(*bandwidth), ErrorCode::kConfig,
            "bandwidth must be positive");
  }
  Kde1d kde;
  kde.points.assign(points.begin(), points.end());
  kde.bandwidth = bandwidth.value_or(silverman_bandwidth(points)) * bandwidth_scale;
  const auto [lo_it, hi_it] = std::minmax_element(points.begin(), points.end());
  const double lo = *lo_it - 3.0 * kde.bandwidth;
  const double hi = *hi_it + 3.0 * kde.bandwidth;
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  kde.grid.resize(grid_size);
  kde.densities.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    kde.grid[i] = i + 1 == grid_size ? hi : lo + step * static_cast<double>(i);
    kde.densities[i] = gaussian_density(points, kde.bandwidth, kde.grid[i]);
  }
  return kde;
}

SplitCandidate pddp_split(std::span<const double> scores, double node_scatter) {
  require(scores.size() >= 2, ErrorCode::kConfig, "pddp_split needs at least 2 scores");
  SplitCandidate c{0.0, node_scatter, strictly_inside(scores, 0.0), Rule::kPddp};
  return c;
}

SplitCandidate depddp_split(std::span<const double> scores, double bandwidth_scale,
                            std::size_t grid_size) {
  require(scores.size() >= 2, ErrorCode::kConfig, "depddp_split needs at least 2 scores");
  SplitCandidate c{0.0, 0.0, false, Rule::kDepddp};
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  if (!(*lo_it < *hi_it)) return c;

  const Kde1d kde = kde_1d(scores, std::nullopt, grid_size, bandwidth_scale);
  // Minima are searched on the log density so valleys whose density
  // underflows to zero are still strict.
  std::vector<double> logd(kde.grid.size());
  for (std::size_t i = 0; i < logd.size(); ++i) {
    logd[i] = log_density(scores, kde.bandwidth, kde.grid[i]);
  }
  // A minimum may be a flat run of equal values (a symmetric valley whose
  // bottom falls between two grid points); the run's first point stands for it.
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < logd.size(); ++i) {
    if (!(logd[i] < logd[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < logd.size() && logd[j + 1] == logd[i]) ++j;
    if (j + 1 < logd.size() && logd[i] < logd[j + 1]) {
      if (!best || logd[i] < logd[*best]) best = i;
    }
    i = j;
  }
  if (!best) return c;
  c.split_point = kde.grid[*best];
  c.criterion = -kde.densities[*best];
  c.feasible = strictly_inside(scores, c.split_point);
  return c;
}

SplitCandidate ipddp_split(std::span<const double> scores, double trim_fraction) {
  require(scores.size() >= 2, ErrorCode::kConfig, "ipddp_split needs at least 2 scores");
  require(trim_fraction >= 0.0 && trim_fraction <= 0.49, ErrorCode::kConfig,
          "trim_fraction must lie in [0, 0.49]");
  SplitCandidate c{0.0, 0.0, false, Rule::kIpddp};
  const auto sorted = sorted_copy(scores);
  const std::size_t n = sorted.size();
  const auto trim = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n) + 1e-9));
  if (n < 2 * trim + 2) return c;
  std::size_t best = trim;
  double best_gap = -1.0;
  for (std::size_t i = trim; i + 1 < n - trim; ++i) {
    const double gap = sorted[i + 1] - sorted[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (!(best_gap > 0.0)) return c;
  c.split_point = cut_between(sorted[best], sorted[best + 1]);
  c.criterion = best_gap;
  c.feasible = true;
  return c;
}

SplitCandidate kmeans_1d_split(std::span<const double> scores) {
  require(scores.size() >= 2, ErrorCode::kConfig, "kmeans_1d_split needs at least 2 scores");
  SplitCandidate c{0.0, 0.0, false, Rule::kKmeans1d};
  const auto sorted = sorted_copy(scores);
  const std::size_t n = sorted.size();
  if (!(sorted.front() < sorted.back())) return c;

  // Prefix sums of mean-shifted values keep the between-cluster term accurate.
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0,
                                       [mean](double acc, double x) { return acc + x - mean; });
  double left_sum = 0.0;
  std::optional<std::size_t> best;
  double best_between = -1.0;
  for (std::size_t b = 0; b + 1 < n; ++b) {
    left_sum += sorted[b] - mean;
    if (!(sorted[b] < sorted[b + 1])) continue;
    const auto nl = static_cast<double>(b + 1);
    const auto nr = static_cast<double>(n - b - 1);
    const double diff = left_sum / nl - (total - left_sum) / nr;
    const double between = nl * nr / static_cast<double>(n) * diff * diff;
    if (between > best_between) {
      best_between = between;
      best = b;
    }
  }
  if (!best) return c;
  c.split_point = cut_between(sorted[*best], sorted[*best + 1]);
  c.criterion = best_between;
  c.feasible = true;
  return c;
}

TwoMeansResult two_means(const Matrix& data, std::span<const std::size_t> rows,
                         std::uint64_t seed, std::size_t restarts, std::size_t max_iter) {
  require(rows.size() >= 2, ErrorCode::kConfig, "two_means needs at least 2 samples");
  require(restarts >= 1, ErrorCode::kConfig, "two_means restarts must be >= 1");
  const std::size_t n = rows.size();
  const std::size_t d = data.cols();
  SeededPrng rng(seed);

  auto assign = [&](const std::vector<double>& left, const std::vector<double>& right,
                    std::vector<bool>& out) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = data.row(rows[i]);
      const double dl = simd::sqdist(x, left);
      const double dr = simd::sqdist(x, right);
      out[i] = dl - dr >= 0.0;
      inertia += out[i] ? dr : dl;
    }
    return inertia;
  };
  auto recenter = [&](const std::vector<bool>& side, std::vector<double>& left,
                      std::vector<double>& right) {
    std::vector<double> sl(d, 0.0), sr(d, 0.0);
    std::size_t nl = 0, nr = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (side[i]) {
        simd::axpy(1.0, data.row(rows[i]), sr);
        ++nr;
      } else {
        simd::axpy(1.0, data.row(rows[i]), sl);
        ++nl;
      }
    }
    // An emptied side keeps its previous center.
    if (nl > 0) {
      simd::scale(1.0 / static_cast<double>(nl), sl);
      left = std::move(sl);
    }
    if (nr > 0) {
      simd::scale(1.0 / static_cast<double>(nr), sr);
      right = std::move(sr);
    }
  };

  TwoMeansResult best;
  bool have_best = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    // k-means++ seeding.
    const std::size_t first = rng.below(n);
    std::vector<double> weights(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = simd::sqdist(data.row(rows[i]), data.row(rows[first]));
      total += weights[i];
    }
    if (!(total > 0.0)) {
      // Every sample coincides with the first center.
      TwoMeansResult degenerate;
      const auto row = data.row(rows[first]);
      degenerate.left_center.assign(row.begin(), row.end());
      degenerate.right_center = degenerate.left_center;
      degenerate.assignment.assign(n, false);
      degenerate.inertia = 0.0;
      degenerate.inertia_trace = {0.0};
      degenerate.feasible = false;
      return degenerate;
    }
    const double target = rng.uniform() * total;
    std::size_t second = n - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cumulative += weights[i];
      if (weights[i] > 0.0 && cumulative > target) {
        second = i;
        break;
      }
    }
    while (weights[second] == 0.0) --second;

    TwoMeansResult run;
    const auto c0 = data.row(rows[first]);
    const auto c1 = data.row(rows[second]);
    run.left_center.assign(c0.begin(), c0.end());
    run.right_center.assign(c1.begin(), c1.end());
    run.assignment.assign(n, false);
    run.inertia = assign(run.left_center, run.right_center, run.assignment);
    run.inertia_trace.push_back(run.inertia);
    std::vector<bool> next(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
      recenter(run.assignment, run.left_center, run.right_center);
      run.inertia = assign(run.left_center, run.right_center, next);
      run.inertia_trace.push_back(run.inertia);
      const bool stable = next == run.assignment;
      run.assignment.swap(next);
      if (stable) break;
    }
    const auto right_count = std::count(run.assignment.begin(), run.assignment.end(), true);
    run.feasible = right_count > 0 && static_cast<std::size_t>(right_count) < n;
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

TwoMeansResult two_means(const DataMatrix& x, std::uint64_t seed, std::size_t restarts) {
  const auto rows = iota_indices(x.rows());
  return two_means(x.matrix(), rows, seed, restarts);
}

}  // namespace divclust::split
