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

#include "divclust/algorithms.hpp"

#include <cmath>
#include <map>
#include <string>

#include "divclust/error.hpp"
#include "divclust/linalg.hpp"
#include "divclust/prng.hpp"
#include "divclust/split_rules.hpp"

namespace divclust::algo {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPddp: return "pddp";
    case Algorithm::kDepddp: return "depddp";
    case Algorithm::kIpddp: return "ipddp";
    case Algorithm::kKmPddp: return "km_pddp";
    case Algorithm::kBkm: return "bkm";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "pddp") return Algorithm::kPddp;
  if (name == "depddp") return Algorithm::kDepddp;
  if (name == "ipddp") return Algorithm::kIpddp;
  if (name == "km_pddp" || name == "kmpddp" || name == "km-pddp") return Algorithm::kKmPddp;
  if (name == "bkm") return Algorithm::kBkm;
  fail(ErrorCode::kConfig, "unknown algorithm '" + std::string(name) + "'");
}

void validate(const AlgorithmConfig& config) {
  if (config.algorithm != Algorithm::kDepddp) {
    require(config.max_clusters.has_value(), ErrorCode::kConfig,
            std::string(to_string(config.algorithm)) + " requires max_clusters (--k)");
  }
  if (config.max_clusters) {
    require(*config.max_clusters >= 1, ErrorCode::kConfig, "max_clusters must be >= 1");
  }
  require(config.trim_fraction >= 0.0 && config.trim_fraction <= 0.49, ErrorCode::kConfig,
          "trim_fraction must lie in [0, 0.49]");
  require(std::isfinite(config.bandwidth_scale) && config.bandwidth_scale > 0.0,
          ErrorCode::kConfig, "bandwidth_scale must be positive");
  require(config.kde_grid >= 16, ErrorCode::kConfig, "kde_grid must be >= 16");
  require(config.min_sample_split >= 2, ErrorCode::kConfig, "min_sample_split must be >= 2");
  require(config.restarts >= 1, ErrorCode::kConfig, "restarts must be >= 1");
  if (config.algorithm != Algorithm::kBkm) proj::validate(config.projection);
}

namespace {

// Seeds depend on which samples a node holds, not on its id, so a subtree
// regrown under fresh ids reproduces the same random choices.
std::uint64_t membership_hash(const std::vector<std::size_t>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t r : rows) {
    h ^= static_cast<std::uint64_t>(r);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

AlgorithmGrower::AlgorithmGrower(AlgorithmConfig config, std::shared_ptr<const Matrix> data)
    : config_(std::move(config)), data_(std::move(data)) {
  require(data_ != nullptr, ErrorCode::kStructural, "the tree has no training data attached");
}

bool AlgorithmGrower::lazy_selection() const {
  return config_.algorithm == Algorithm::kPddp || config_.algorithm == Algorithm::kBkm;
}

double AlgorithmGrower::selection_score(const tree::ClusterTree& tree, tree::NodeId leaf) const {
  return linalg::CenteredRows::around_mean(*data_, tree.node(leaf).sample_indices).scatter();
}

void AlgorithmGrower::prepare_leaf(tree::ClusterTree& tree, tree::NodeId leaf) const {
  const tree::ClusterNode& node = tree.node(leaf);
  const std::vector<std::size_t>& rows = node.sample_indices;
  const std::uint64_t node_seed = derive_seed(config_.seed, membership_hash(rows));

  if (config_.algorithm == Algorithm::kBkm) {
    split::TwoMeansResult bisection = split::two_means(*data_, rows, node_seed, config_.restarts);
    if (!bisection.feasible) {
      tree.mark_unsplittable(leaf, "2-means found a single cluster");
      return;
    }
    proj::AxisModel model =
        proj::CentroidAxis{std::move(bisection.left_center), std::move(bisection.right_center)};
    std::vector<double> scores(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      scores[i] = proj::score(model, data_->row(rows[i]), *data_);
    }
    auto projection = tree::NodeProjection::make(std::move(scores), std::move(model), "two_means");
    split::SplitCandidate candidate;
    candidate.rule = split::Rule::kTwoMeans;
    candidate.split_point = 0.0;
    candidate.criterion = linalg::CenteredRows::around_mean(*data_, rows).scatter();
    candidate.feasible = projection->min_score < 0.0 && 0.0 < projection->max_score;
    tree.set_projection(leaf, std::move(projection), candidate);
    return;
  }

  proj::ProjectionConfig pc = config_.projection;
  pc.components = 1;
  proj::ProjectionResult projected;
  try {
    projected = proj::project(*data_, rows, pc, node_seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroVariance || e.code() == ErrorCode::kRank) {
      tree.mark_unsplittable(leaf, e.what());
      return;
    }
    throw;
  }
  std::vector<double> scores = projected.column(0);
  split::SplitCandidate candidate;
  switch (config_.algorithm) {
    case Algorithm::kPddp:
      candidate = split::pddp_split(scores,
                                    linalg::CenteredRows::around_mean(*data_, rows).scatter());
      break;
    case Algorithm::kDepddp:
      candidate = split::depddp_split(scores, config_.bandwidth_scale, config_.kde_grid);
      break;
    case Algorithm::kIpddp:
      candidate = split::ipddp_split(scores, config_.trim_fraction);
      break;
    case Algorithm::kKmPddp:
      candidate = split::kmeans_1d_split(scores);
      break;
    case Algorithm::kBkm:
      break;
  }
  auto projection = tree::NodeProjection::make(std::move(scores), std::move(projected.axes[0]),
                                               std::string(proj::to_string(pc.method)));
  tree.set_projection(leaf, std::move(projection), candidate);
}

std::optional<std::size_t> AlgorithmGrower::edit_budget(std::size_t previous_leaves) const {
  if (config_.algorithm == Algorithm::kDepddp && !config_.max_clusters &&
      !config_.depddp_fixed_edit_budget) {
    return std::nullopt;
  }
  return previous_leaves;
}

FitResult fit(const AlgorithmConfig& config, std::shared_ptr<const DataMatrix> data) {
  require(data != nullptr, ErrorCode::kData, "fit: no data");
  validate(config);
  std::shared_ptr<const Matrix> matrix(data, &data->matrix());
  tree::ClusterTree tree(data->rows(), config.min_sample_split);
  tree.training = matrix;
  const AlgorithmGrower grower(config, matrix);
  tree::grow(tree, grower, tree.root(), config.max_clusters);

  FitResult result{std::move(tree), {}, FitStatus::kOk, {}};
  result.labels = result.tree.labels();
  const std::size_t leaves = result.tree.leaf_count();
  if (config.max_clusters && leaves < *config.max_clusters) {
    result.status = FitStatus::kStoppedEarly;
    result.warning = "stopped at " + std::to_string(leaves) + " of " +
                     std::to_string(*config.max_clusters) +
                     " clusters: no feasible split remains";
  }
  return result;
}

FitResult fit(const AlgorithmConfig& config, const DataMatrix& data) {
  return fit(config, std::make_shared<const DataMatrix>(data));
}

std::vector<int> predict(const tree::ClusterTree& tree, const AlgorithmConfig& config,
                         const DataMatrix& x_new) {
  (void)config;
  if (tree.training) {
    require(tree.training->cols() == x_new.cols(), ErrorCode::kShape,
            "predict: expected " + std::to_string(tree.training->cols()) + " features, got " +
                std::to_string(x_new.cols()));
  }
  std::map<tree::NodeId, int> leaf_label;
  int next = 0;
  for (tree::NodeId id : tree.leaves()) leaf_label[id] = next++;

  static const Matrix kNoReference;
  const Matrix& reference = tree.training ? *tree.training : kNoReference;
  std::vector<int> out(x_new.rows());
  for (std::size_t i = 0; i < x_new.rows(); ++i) {
    const auto x = x_new.row(i);
    tree::NodeId id = tree.root();
    while (!tree.node(id).is_leaf()) {
      const tree::ClusterNode& node = tree.node(id);
      require(node.projection != nullptr, ErrorCode::kStructural,
              "internal node " + std::to_string(id) + " has no axis model");
      const double s = proj::score(node.projection->model, x, reference);
      id = s < *node.split_point() ? node.children->first : node.children->second;
    }
    out[i] = leaf_label.at(id);
  }
  return out;
}

void edit_split(tree::ClusterTree& tree, const AlgorithmConfig& config, tree::NodeId node,
                double point) {
  const AlgorithmGrower grower(config, tree.training);
  tree::recompute_subtree(tree, node, point, grower);
}

}  // namespace divclust::algo
