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

#include "divclust/cluster_tree.hpp"

#include <algorithm>
#include <string>

#include "divclust/error.hpp"

namespace divclust::tree {
namespace {

std::string id_str(NodeId id) { return std::to_string(id); }

// Bitwise comparison of two subtrees, ignoring node ids and the manual flag of
// the edited root.
bool same_shape(const ClusterTree& tree, NodeId id,
                const std::map<NodeId, const ClusterNode*>& old_nodes, NodeId old_id,
                bool is_root) {
  const ClusterNode& now = tree.node(id);
  const ClusterNode& before = *old_nodes.at(old_id);
  if (now.sample_indices != before.sample_indices) return false;
  if (now.is_leaf() != before.is_leaf()) return false;
  if (now.is_leaf()) return true;
  if (now.split_point() != before.split_point()) return false;
  if (!is_root && now.manual_split != before.manual_split) return false;
  return same_shape(tree, now.children->first, old_nodes, before.children->first, false) &&
         same_shape(tree, now.children->second, old_nodes, before.children->second, false);
}

}  // namespace

std::shared_ptr<const NodeProjection> NodeProjection::make(std::vector<double> scores,
                                                           proj::AxisModel model,
                                                           std::string method) {
  auto p = std::make_shared<NodeProjection>();
  if (!scores.empty()) {
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    p->min_score = *lo;
    p->max_score = *hi;
  }
  p->scores = std::move(scores);
  p->model = std::move(model);
  p->method = std::move(method);
  return p;
}

std::optional<double> ClusterNode::split_point() const {
  if (is_leaf()) return std::nullopt;
  if (manual_split) return manual_split;
  if (candidate) return candidate->split_point;
  return std::nullopt;
}

ClusterTree::ClusterTree(std::size_t n_samples, std::size_t min_sample_split)
    : n_samples_(n_samples), min_sample_split_(min_sample_split) {
  require(n_samples >= 1, ErrorCode::kStructural, "a tree needs at least one sample");
  ClusterNode root;
  root.id = 0;
  root.sample_indices = iota_indices(n_samples);
  nodes_.emplace(0, std::move(root));
}

const ClusterNode& ClusterTree::node(NodeId id) const {
  auto it = nodes_.find(id);
  require(it != nodes_.end(), ErrorCode::kStructural, "unknown node " + id_str(id));
  return it->second;
}

ClusterNode& ClusterTree::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  require(it != nodes_.end(), ErrorCode::kStructural, "unknown node " + id_str(id));
  return it->second;
}

std::vector<NodeId> ClusterTree::leaves() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.is_leaf()) out.push_back(id);
  }
  return out;
}

std::size_t ClusterTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const auto& entry) { return entry.second.is_leaf(); }));
}

std::vector<NodeId> ClusterTree::subtree(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId current = stack.back();
    stack.pop_back();
    const ClusterNode& n = node(current);
    out.push_back(current);
    if (n.children) {
      stack.push_back(n.children->second);
      stack.push_back(n.children->first);
    }
  }
  return out;
}

std::vector<NodeId> ClusterTree::subtree_leaves(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId n : subtree(id)) {
    if (node(n).is_leaf()) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ClusterTree::set_projection(NodeId id, std::shared_ptr<const NodeProjection> projection,
                                 std::optional<split::SplitCandidate> candidate) {
  ClusterNode& n = mutable_node(id);
  if (projection) {
    require(projection->scores.size() == n.size(), ErrorCode::kStructural,
            "projection of node " + id_str(id) + " has the wrong number of scores");
  }
  n.projection = std::move(projection);
  n.candidate = candidate;
  n.prepared = true;
  n.note.clear();
}

void ClusterTree::mark_unsplittable(NodeId id, std::string note) {
  ClusterNode& n = mutable_node(id);
  n.projection.reset();
  n.candidate.reset();
  n.prepared = true;
  n.note = std::move(note);
}

std::pair<NodeId, NodeId> ClusterTree::split_node(NodeId id, double point, bool manual) {
  ClusterNode& parent = mutable_node(id);
  require(parent.is_leaf(), ErrorCode::kStructural, "node " + id_str(id) + " is not a leaf");
  require(parent.projection != nullptr, ErrorCode::kStructural,
          "node " + id_str(id) + " has no projection to split on");
  const NodeProjection& p = *parent.projection;
  if (!(p.min_score < point && point < p.max_score)) {
    fail(ErrorCode::kDegenerateSplit, "split point " + std::to_string(point) +
                                          " is outside the open score range of node " +
                                          id_str(id));
  }
  ClusterNode left, right;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    (p.scores[i] < point ? left : right).sample_indices.push_back(parent.sample_indices[i]);
  }
  if (left.sample_indices.empty() || right.sample_indices.empty()) {
    fail(ErrorCode::kDegenerateSplit, "split of node " + id_str(id) + " leaves one side empty");
  }
  left.id = next_id_++;
  right.id = next_id_++;
  left.parent = right.parent = id;
  left.depth = right.depth = parent.depth + 1;
  parent.children = std::make_pair(left.id, right.id);
  if (manual) {
    parent.manual_split = point;
  } else {
    parent.manual_split.reset();
  }
  split_order_.push_back(id);
  const NodeId lid = left.id, rid = right.id;
  nodes_.emplace(lid, std::move(left));
  nodes_.emplace(rid, std::move(right));
  return {lid, rid};
}

std::optional<NodeId> ClusterTree::select_next_leaf(std::optional<NodeId> scope) const {
  const std::vector<NodeId> candidates = scope ? subtree_leaves(*scope) : leaves();
  std::optional<NodeId> best;
  double best_criterion = 0.0;
  for (NodeId id : candidates) {
    const ClusterNode& n = node(id);
    if (!n.candidate || !n.candidate->feasible || !n.projection) continue;
    if (n.size() < min_sample_split_) continue;
    if (!best || n.candidate->criterion > best_criterion) {
      best = id;
      best_criterion = n.candidate->criterion;
    }
  }
  return best;
}

std::vector<int> ClusterTree::labels() const {
  std::vector<int> out(n_samples_, -1);
  int label = 0;
  for (const auto& [id, n] : nodes_) {
    if (!n.is_leaf()) continue;
    for (std::size_t s : n.sample_indices) out[s] = label;
    ++label;
  }
  return out;
}

void ClusterTree::discard_descendants(NodeId id) {
  ClusterNode& n = mutable_node(id);
  if (n.is_leaf()) return;
  const auto doomed = subtree(id);
  for (NodeId d : doomed) {
    if (d != id) nodes_.erase(d);
  }
  split_order_.erase(std::remove_if(split_order_.begin(), split_order_.end(),
                                    [&](NodeId s) {
                                      return std::find(doomed.begin(), doomed.end(), s) !=
                                             doomed.end();
                                    }),
                     split_order_.end());
  ClusterNode& kept = mutable_node(id);
  kept.children.reset();
  kept.manual_split.reset();
}

ClusterTree::SubtreeSnapshot ClusterTree::snapshot(NodeId id) const {
  SubtreeSnapshot s;
  s.root = id;
  for (NodeId n : subtree(id)) s.nodes.push_back(node(n));
  s.next_id = next_id_;
  s.split_order = split_order_;
  return s;
}

void ClusterTree::restore(SubtreeSnapshot snapshot) {
  discard_descendants(snapshot.root);
  for (auto& n : snapshot.nodes) {
    const NodeId id = n.id;
    nodes_.insert_or_assign(id, std::move(n));
  }
  next_id_ = snapshot.next_id;
  split_order_ = std::move(snapshot.split_order);
}

TreeBuilder::TreeBuilder(std::size_t n_samples, std::size_t min_sample_split, NodeId next_id,
                         std::vector<NodeId> split_order)
    : tree_(n_samples, min_sample_split) {
  tree_.nodes_.clear();
  tree_.next_id_ = next_id;
  tree_.split_order_ = std::move(split_order);
}

void TreeBuilder::add(ClusterNode node) {
  const NodeId id = node.id;
  require(tree_.nodes_.emplace(id, std::move(node)).second, ErrorCode::kStructural,
          "duplicate node id " + id_str(id));
}

ClusterTree TreeBuilder::build() && {
  auto& nodes = tree_.nodes_;
  require(nodes.count(0) != 0, ErrorCode::kStructural, "tree has no root node 0");
  std::vector<int> owner(tree_.n_samples_, -1);
  std::size_t internal = 0;
  for (auto& [id, n] : nodes) {
    require(id < tree_.next_id_, ErrorCode::kStructural,
            "node id " + id_str(id) + " is not below next_id");
    if (n.children) {
      ++internal;
      const auto [l, r] = *n.children;
      require(nodes.count(l) && nodes.count(r), ErrorCode::kStructural,
              "node " + id_str(id) + " references a missing child");
      require(l < r, ErrorCode::kStructural, "left child must have the smaller id");
    } else {
      std::sort(n.sample_indices.begin(), n.sample_indices.end());
      for (std::size_t s : n.sample_indices) {
        require(s < tree_.n_samples_ && owner[s] == -1, ErrorCode::kStructural,
                "leaf sample sets are not a partition");
        owner[s] = static_cast<int>(id);
      }
    }
  }
  require(std::find(owner.begin(), owner.end(), -1) == owner.end(), ErrorCode::kStructural,
          "leaves do not cover every sample");
  require(tree_.leaf_count() == internal + 1, ErrorCode::kStructural,
          "leaf count must equal internal count + 1");
  // Rebuild internal sample lists bottom-up and check reachability from the root.
  std::function<void(NodeId, std::size_t, std::optional<NodeId>)> fill =
      [&](NodeId id, std::size_t depth, std::optional<NodeId> parent) {
        ClusterNode& n = nodes.at(id);
        n.depth = depth;
        n.parent = parent;
        if (!n.children) return;
        fill(n.children->first, depth + 1, id);
        fill(n.children->second, depth + 1, id);
        const auto& a = nodes.at(n.children->first).sample_indices;
        const auto& b = nodes.at(n.children->second).sample_indices;
        n.sample_indices.clear();
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(n.sample_indices));
      };
  fill(0, 0, std::nullopt);
  require(tree_.subtree(0).size() == nodes.size(), ErrorCode::kStructural,
          "tree contains unreachable nodes");
  return std::move(tree_);
}

void ensure_prepared(ClusterTree& tree, const SubtreeGrower& grower, NodeId leaf) {
  const ClusterNode& n = tree.node(leaf);
  if (n.prepared || !n.is_leaf()) return;
  if (n.size() < tree.min_sample_split() || n.size() < 2) {
    tree.mark_unsplittable(leaf, "below min_sample_split");
  } else {
    grower.prepare_leaf(tree, leaf);
  }
}

namespace {

bool splittable(const ClusterTree& tree, const ClusterNode& n) {
  return n.candidate && n.candidate->feasible && n.projection &&
         n.size() >= tree.min_sample_split();
}

// Lazy variant of the select step: ranks leaves by the grower's cheap score
// and projects only the current best, until a feasible one turns up.
std::optional<NodeId> select_lazily(ClusterTree& tree, const SubtreeGrower& grower, NodeId scope,
                                    std::map<NodeId, double>& score_cache) {
  while (true) {
    std::optional<NodeId> best;
    double best_score = 0.0;
    for (NodeId id : tree.subtree_leaves(scope)) {
      const ClusterNode& n = tree.node(id);
      double score;
      if (n.prepared) {
        if (!splittable(tree, n)) continue;
        score = n.candidate->criterion;
      } else {
        auto it = score_cache.find(id);
        if (it == score_cache.end()) {
          it = score_cache.emplace(id, grower.selection_score(tree, id)).first;
        }
        score = it->second;
      }
      if (!best || score > best_score) {
        best = id;
        best_score = score;
      }
    }
    if (!best) return std::nullopt;
    if (tree.node(*best).prepared) return best;
    grower.prepare_leaf(tree, *best);
    if (splittable(tree, tree.node(*best))) return best;
  }
}

}  // namespace

void grow(ClusterTree& tree, const SubtreeGrower& grower, NodeId scope,
          std::optional<std::size_t> leaf_budget) {
  const bool lazy = grower.lazy_selection();
  std::map<NodeId, double> score_cache;
  while (true) {
    for (NodeId leaf : tree.subtree_leaves(scope)) {
      const ClusterNode& n = tree.node(leaf);
      if (n.prepared) continue;
      if (n.size() < tree.min_sample_split() || n.size() < 2) {
        tree.mark_unsplittable(leaf, "below min_sample_split");
      } else if (!lazy) {
        grower.prepare_leaf(tree, leaf);
      }
    }
    if (leaf_budget && tree.subtree_leaves(scope).size() >= *leaf_budget) return;
    const auto next = lazy ? select_lazily(tree, grower, scope, score_cache)
                           : tree.select_next_leaf(scope);
    if (!next) return;
    tree.split_node(*next, tree.node(*next).candidate->split_point, false);
  }
}

void recompute_subtree(ClusterTree& tree, NodeId id, double new_point,
                       const SubtreeGrower& grower) {
  ensure_prepared(tree, grower, id);
  const ClusterNode& target = tree.node(id);
  require(target.projection != nullptr, ErrorCode::kStructural,
          "node " + id_str(id) + " has no projection to split on");
  if (!(target.projection->min_score < new_point && new_point < target.projection->max_score)) {
    fail(ErrorCode::kDegenerateSplit, "split point " + std::to_string(new_point) +
                                          " is outside the open score range of node " +
                                          id_str(id));
  }
  const std::size_t previous_leaves = tree.subtree_leaves(id).size();
  ClusterTree::SubtreeSnapshot before = tree.snapshot(id);

  try {
    tree.discard_descendants(id);
    tree.split_node(id, new_point, true);
    std::optional<std::size_t> budget = grower.edit_budget(previous_leaves);
    if (budget) budget = std::max<std::size_t>(*budget, 2);
    grow(tree, grower, id, budget);
  } catch (...) {
    tree.restore(std::move(before));
    throw;
  }

  std::map<NodeId, const ClusterNode*> old_nodes;
  for (const auto& n : before.nodes) old_nodes.emplace(n.id, &n);
  if (same_shape(tree, id, old_nodes, id, true)) {
    for (auto& n : before.nodes) {
      if (n.id == id) n.manual_split = new_point;
    }
    tree.restore(std::move(before));
  }
}

std::vector<LinkageRow> to_linkage(const ClusterTree& tree) {
  const std::size_t n = tree.n_samples();
  std::vector<LinkageRow> rows;
  rows.reserve(n > 0 ? n - 1 : 0);
  struct Merged {
    double id;
    double height;
    double size;
  };
  auto emit = [&](double a, double b, double height, double size) {
    rows.push_back({a, b, height, size});
    return Merged{static_cast<double>(n + rows.size() - 1), height, size};
  };
  std::function<Merged(NodeId)> visit = [&](NodeId id) -> Merged {
    const ClusterNode& node = tree.node(id);
    if (node.is_leaf()) {
      Merged current{static_cast<double>(node.sample_indices.front()), 0.0, 1.0};
      for (std::size_t k = 1; k < node.sample_indices.size(); ++k) {
        current = emit(current.id, static_cast<double>(node.sample_indices[k]), 1.0,
                       current.size + 1.0);
      }
      return current;
    }
    const Merged left = visit(node.children->first);
    const Merged right = visit(node.children->second);
    return emit(left.id, right.id, 1.0 + std::max(left.height, right.height),
                left.size + right.size);
  };
  visit(tree.root());
  return rows;
}

}  // namespace divclust::tree
