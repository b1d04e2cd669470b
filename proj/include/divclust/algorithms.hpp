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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divclust/cluster_tree.hpp"
#include "divclust/matrix.hpp"
#include "divclust/projections.hpp"

namespace divclust::algo {

enum class Algorithm { kPddp, kDepddp, kIpddp, kKmPddp, kBkm };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::kPddp;
  std::optional<std::size_t> max_clusters;  // required except for depddp
  proj::ProjectionConfig projection;        // ignored by bkm
  double trim_fraction = 0.1;               // ipddp
  double bandwidth_scale = 1.0;             // depddp
  std::size_t kde_grid = 512;               // depddp
  std::size_t min_sample_split = 5;
  std::uint64_t seed = 0;
  std::size_t restarts = 3;  // bkm; km_pddp's 1-D sweep is exact and ignores it
  // depddp only: regrow edited subtrees to their previous leaf count instead
  // of running the density stopping rule. Implied when max_clusters is set.
  bool depddp_fixed_edit_budget = false;
};

void validate(const AlgorithmConfig& config);

enum class FitStatus { kOk, kStoppedEarly };

struct FitResult {
  tree::ClusterTree tree{1};
  std::vector<int> labels;
  FitStatus status = FitStatus::kOk;
  std::string warning;
};

/// Builds the tree. Deterministic in (config, data).
FitResult fit(const AlgorithmConfig& config, std::shared_ptr<const DataMatrix> data);
FitResult fit(const AlgorithmConfig& config, const DataMatrix& data);

/// Routes each new sample from the root using the stored node axes; labels
/// follow the same leaf enumeration as ClusterTree::labels.
std::vector<int> predict(const tree::ClusterTree& tree, const AlgorithmConfig& config,
                         const DataMatrix& x_new);

/// The algorithm-specific projection + split rule used by fit and by
/// subtree recomputation.
class AlgorithmGrower : public tree::SubtreeGrower {
 public:
  AlgorithmGrower(AlgorithmConfig config, std::shared_ptr<const Matrix> data);

  void prepare_leaf(tree::ClusterTree& tree, tree::NodeId leaf) const override;
  std::optional<std::size_t> edit_budget(std::size_t previous_leaves) const override;
  /// pddp and bkm select by node scatter, which needs no projection.
  bool lazy_selection() const override;
  double selection_score(const tree::ClusterTree& tree, tree::NodeId leaf) const override;

  const AlgorithmConfig& config() const noexcept { return config_; }

 private:
  AlgorithmConfig config_;
  std::shared_ptr<const Matrix> data_;
};

/// Split the node at `point` and regrow its subtree with the algorithm.
void edit_split(tree::ClusterTree& tree, const AlgorithmConfig& config, tree::NodeId node,
                double point);

}  // namespace divclust::algo
