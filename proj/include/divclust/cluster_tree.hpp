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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divclust/matrix.hpp"
#include "divclust/projections.hpp"
#include "divclust/split_rules.hpp"

namespace divclust::tree {

using NodeId = std::uint32_t;

// The splitting coordinate of a node's samples, plus the model that produced
// it. Immutable once computed and shared between tree copies.
struct NodeProjection {
  std::vector<double> scores;  // aligned with the node's sample_indices
  proj::AxisModel model;
  std::string method;          // "pca", "kpca", "ica", "two_means"
  double min_score = 0.0;
  double max_score = 0.0;

  static std::shared_ptr<const NodeProjection> make(std::vector<double> scores,
                                                    proj::AxisModel model, std::string method);
};

struct ClusterNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::vector<std::size_t> sample_indices;  // sorted
  std::size_t depth = 0;
  std::shared_ptr<const NodeProjection> projection;
  std::optional<split::SplitCandidate> candidate;
  bool prepared = false;  // a candidate computation was attempted
  std::string note;       // why the node has no projection, when it has none
  std::optional<double> manual_split;
  std::optional<std::pair<NodeId, NodeId>> children;

  bool is_leaf() const noexcept { return !children.has_value(); }
  std::size_t size() const noexcept { return sample_indices.size(); }
  /// The cut actually applied (manual override first), for internal nodes.
  std::optional<double> split_point() const;
};

/// Binary divisive tree over sample indices 0..n-1. Ids are allocated
/// monotonically and never reused.
class ClusterTree {
 public:
  explicit ClusterTree(std::size_t n_samples, std::size_t min_sample_split = 5);

  NodeId root() const noexcept { return 0; }
  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t min_sample_split() const noexcept { return min_sample_split_; }
  NodeId next_id() const noexcept { return next_id_; }
  const std::vector<NodeId>& split_order() const noexcept { return split_order_; }
  const std::map<NodeId, ClusterNode>& nodes() const noexcept { return nodes_; }

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const ClusterNode& node(NodeId id) const;

  std::vector<NodeId> leaves() const;
  std::size_t leaf_count() const;
  /// Preorder ids of the subtree rooted at `id` (including `id`).
  std::vector<NodeId> subtree(NodeId id) const;
  std::vector<NodeId> subtree_leaves(NodeId id) const;

  /// Attaches a node's cached projection and split candidate.
  void set_projection(NodeId id, std::shared_ptr<const NodeProjection> projection,
                      std::optional<split::SplitCandidate> candidate);
  /// Marks a node as evaluated without a projection (too small, zero variance).
  void mark_unsplittable(NodeId id, std::string note);

  /// Splits a leaf at `point` on its projection scores (< point goes left).
  std::pair<NodeId, NodeId> split_node(NodeId id, double point, bool manual);

  /// Leaf with a feasible candidate and >= min_sample_split samples that
  /// maximizes the criterion; ties go to the lower id. `scope` restricts the
  /// search to one subtree.
  std::optional<NodeId> select_next_leaf(std::optional<NodeId> scope = std::nullopt) const;

  /// Leaves in ascending id order get labels 0..k-1.
  std::vector<int> labels() const;

  /// Removes every descendant of `id` and turns it back into a leaf.
  void discard_descendants(NodeId id);

  /// A copy of one subtree together with the id counter and split order,
  /// so an edit can be rolled back.
  struct SubtreeSnapshot {
    NodeId root = 0;
    std::vector<ClusterNode> nodes;
    NodeId next_id = 1;
    std::vector<NodeId> split_order;
  };
  SubtreeSnapshot snapshot(NodeId id) const;
  /// Replaces the current subtree under snapshot.root with the snapshot.
  void restore(SubtreeSnapshot snapshot);

  /// Training matrix, needed to route new samples through kernel axes.
  std::shared_ptr<const Matrix> training;

 private:
  friend class TreeBuilder;
  ClusterNode& mutable_node(NodeId id);

  std::size_t n_samples_;
  std::size_t min_sample_split_;
  NodeId next_id_ = 1;
  std::map<NodeId, ClusterNode> nodes_;
  std::vector<NodeId> split_order_;
};

/// Reassembles a tree from serialized parts; validates every invariant.
class TreeBuilder {
 public:
  TreeBuilder(std::size_t n_samples, std::size_t min_sample_split, NodeId next_id,
              std::vector<NodeId> split_order);
  void add(ClusterNode node);
  ClusterTree build() &&;

 private:
  ClusterTree tree_;
};

/// The algorithm-specific half of the split loop.
class SubtreeGrower {
 public:
  virtual ~SubtreeGrower() = default;
  /// Computes and attaches the leaf's projection and candidate.
  virtual void prepare_leaf(ClusterTree& tree, NodeId leaf) const = 0;
  /// Leaf budget for a regrown subtree that held `previous_leaves` leaves;
  /// nullopt means "grow until no feasible leaf remains".
  virtual std::optional<std::size_t> edit_budget(std::size_t previous_leaves) const = 0;
  /// True when selection_score gives, without projecting, the criterion
  /// prepare_leaf would attach. Such growers are prepared lazily: only the
  /// leaf about to be split is projected, and the resulting tree is the same.
  virtual bool lazy_selection() const { return false; }
  virtual double selection_score(const ClusterTree& tree, NodeId leaf) const {
    (void)tree;
    (void)leaf;
    return 0.0;
  }
};

/// Prepares `leaf` if it has not been evaluated yet.
void ensure_prepared(ClusterTree& tree, const SubtreeGrower& grower, NodeId leaf);

/// Select-and-split loop: prepares unprepared leaves, then splits the best
/// leaf until the scope holds `leaf_budget` leaves or nothing is feasible.
void grow(ClusterTree& tree, const SubtreeGrower& grower, NodeId scope,
          std::optional<std::size_t> leaf_budget);

/// Discards the descendants of `id`, splits it at `new_point` (recorded as a
/// manual split) and lets the grower regrow the subtree. Nodes outside the
/// subtree are untouched. When the regrown subtree is identical to the
/// discarded one the original node ids are kept.
void recompute_subtree(ClusterTree& tree, NodeId id, double new_point,
                       const SubtreeGrower& grower);

struct LinkageRow {
  double a = 0.0;
  double b = 0.0;
  double height = 0.0;
  double size = 0.0;

  friend bool operator==(const LinkageRow&, const LinkageRow&) = default;
};

/// (n-1) x 4 agglomerative encoding: samples chain-merge at height 1 inside
/// each leaf, internal nodes merge their children at 1 + max(child heights).
std::vector<LinkageRow> to_linkage(const ClusterTree& tree);

}  // namespace divclust::tree
