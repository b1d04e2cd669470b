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
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "divclust/cluster_tree.hpp"
#include "divclust/split_rules.hpp"
#include "support/fixtures.hpp"

using namespace divclust;
using tree::ClusterTree;
using tree::NodeId;

namespace {

// Attaches a projection whose scores are given per node sample.
void attach(ClusterTree& t, NodeId id, std::vector<double> scores, double criterion,
            std::optional<double> point = std::nullopt) {
  auto p = tree::NodeProjection::make(std::move(scores), proj::LinearAxis{{1.0}, 0.0}, "pca");
  split::SplitCandidate c{point.value_or(0.0), criterion, true, split::Rule::kPddp};
  t.set_projection(id, p, c);
}

// Grower used to exercise the tree loop on one-column data: splits on the
// raw coordinate with the exact 1-D 2-means rule.
class ColumnGrower : public tree::SubtreeGrower {
 public:
  ColumnGrower(std::vector<double> values, std::optional<std::size_t> budget_override = std::nullopt)
      : values_(std::move(values)), budget_override_(budget_override) {}

  void prepare_leaf(ClusterTree& t, NodeId leaf) const override {
    ++prepared;
    std::vector<double> scores;
    for (std::size_t s : t.node(leaf).sample_indices) scores.push_back(values_[s]);
    const auto c = split::kmeans_1d_split(scores);
    t.set_projection(leaf, tree::NodeProjection::make(scores, proj::LinearAxis{{1.0}, 0.0}, "pca"), c);
  }
  std::optional<std::size_t> edit_budget(std::size_t previous) const override {
    return budget_override_ ? budget_override_ : std::optional<std::size_t>(previous);
  }

  mutable int prepared = 0;

 private:
  std::vector<double> values_;
  std::optional<std::size_t> budget_override_;
};

void check_partition(const ClusterTree& t) {
  std::vector<int> owner(t.n_samples(), 0);
  for (NodeId leaf : t.leaves()) {
    for (std::size_t s : t.node(leaf).sample_indices) ++owner[s];
  }
  for (int c : owner) CHECK(c == 1);
  std::size_t internal = 0;
  for (const auto& [id, n] : t.nodes()) {
    if (n.is_leaf()) continue;
    ++internal;
    const auto& l = t.node(n.children->first).sample_indices;
    const auto& r = t.node(n.children->second).sample_indices;
    std::vector<std::size_t> u;
    std::merge(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(u));
    CHECK(u == n.sample_indices);
    CHECK(!l.empty());
    CHECK(!r.empty());
  }
  CHECK(t.leaf_count() == internal + 1);
}

}  // namespace

TEST_SUITE("split_node") {
  TEST_CASE("sign partition of four samples") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 1.0);
    const auto [l, r] = t.split_node(0, 0.0, false);
    CHECK(l == 1);
    CHECK(r == 2);
    CHECK(t.node(1).sample_indices == std::vector<std::size_t>{0, 1});
    CHECK(t.node(2).sample_indices == std::vector<std::size_t>{2, 3});
    CHECK(t.node(1).depth == 1);
    CHECK(*t.node(1).parent == 0);
    CHECK(t.split_order() == std::vector<NodeId>{0});
    CHECK_FALSE(t.node(0).manual_split.has_value());
    CHECK(*t.node(0).split_point() == 0.0);
  }

  TEST_CASE("point outside the score range is a degenerate split") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 1.0);
    CHECK(fixtures::error_code_of([&] { t.split_node(0, -3.0, false); }) == ErrorCode::kDegenerateSplit);
    CHECK(fixtures::error_code_of([&] { t.split_node(0, -2.0, true); }) == ErrorCode::kDegenerateSplit);
    CHECK(t.leaf_count() == 1);
  }

  TEST_CASE("non-leaf and unknown targets are structural errors") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 1.0);
    t.split_node(0, 0.0, false);
    CHECK(fixtures::error_code_of([&] { t.split_node(0, 0.5, false); }) == ErrorCode::kStructural);
    CHECK(fixtures::error_code_of([&] { t.node(17); }) == ErrorCode::kStructural);
  }

  TEST_CASE("ids are allocated monotonically") {
    ClusterTree t(6, 2);
    attach(t, 0, {0, 1, 2, 3, 4, 5}, 1.0);
    t.split_node(0, 2.5, false);  // 1 = {0,1,2}, 2 = {3,4,5}
    attach(t, 2, {3, 4, 5}, 1.0);
    const auto [a, b] = t.split_node(2, 3.5, false);
    CHECK(a == 3);
    CHECK(b == 4);
    attach(t, 1, {0, 1, 2}, 1.0);
    const auto [c, d] = t.split_node(1, 0.5, true);
    CHECK(c == 5);
    CHECK(d == 6);
    CHECK(t.next_id() == 7);
    CHECK(t.split_order() == std::vector<NodeId>{0, 2, 1});
    CHECK(*t.node(1).manual_split == 0.5);
    check_partition(t);
  }
}

TEST_SUITE("select_next_leaf") {
  TEST_CASE("single feasible leaf") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 3.0);
    CHECK(t.select_next_leaf() == NodeId{0});
  }

  TEST_CASE("maximum criterion wins and ties go to the lower id") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 3.0);
    t.split_node(0, 0.0, false);
    attach(t, 1, {-2, -1}, 0.5, -1.5);
    attach(t, 2, {1, 2}, 0.9, 1.5);
    CHECK(t.select_next_leaf() == NodeId{2});
    attach(t, 1, {-2, -1}, 0.7, -1.5);
    attach(t, 2, {1, 2}, 0.7, 1.5);
    CHECK(t.select_next_leaf() == NodeId{1});
  }

  TEST_CASE("infeasible and undersized leaves are skipped") {
    ClusterTree t(5, 3);
    attach(t, 0, {-2, -1, 0, 1, 2}, 3.0);
    t.split_node(0, 0.5, false);  // 1 = {0,1,2}, 2 = {3,4}
    attach(t, 1, {-2, -1, 0}, 0.1, -0.5);
    attach(t, 2, {1, 2}, 99.0, 1.5);  // below min_sample_split 3
    CHECK(t.select_next_leaf() == NodeId{1});
    t.set_projection(1, t.node(1).projection, split::SplitCandidate{0, 5.0, false, split::Rule::kPddp});
    CHECK_FALSE(t.select_next_leaf().has_value());
  }

  TEST_CASE("scope restricts the search") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 3.0);
    t.split_node(0, 0.0, false);
    attach(t, 1, {-2, -1}, 9.0, -1.5);
    attach(t, 2, {1, 2}, 1.0, 1.5);
    CHECK(t.select_next_leaf(NodeId{2}) == NodeId{2});
  }
}

TEST_SUITE("labels") {
  TEST_CASE("unsplit tree is all zeros") {
    CHECK(ClusterTree(5).labels() == std::vector<int>(5, 0));
  }

  TEST_CASE("one split") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 3.0);
    t.split_node(0, 0.0, false);
    CHECK(t.labels() == std::vector<int>{0, 0, 1, 1});
  }

  TEST_CASE("three leaves follow ascending leaf ids") {
    ClusterTree t(6, 2);
    attach(t, 0, {5, 0, 4, 1, 3, 2}, 1.0);
    t.split_node(0, 2.5, false);  // 1 = {1,3,5}, 2 = {0,2,4}
    attach(t, 1, {0, 1, 2}, 1.0);
    t.split_node(1, 0.5, false);  // 3 = {1}, 4 = {3,5}
    // Enumeration oracle: leaf ids ascending are 2, 3, 4.
    std::map<NodeId, int> label_of;
    int next = 0;
    for (NodeId id : t.leaves()) label_of[id] = next++;
    std::vector<int> expect(6);
    for (NodeId id : t.leaves()) {
      for (std::size_t s : t.node(id).sample_indices) expect[s] = label_of[id];
    }
    CHECK(t.leaves() == std::vector<NodeId>{2, 3, 4});
    CHECK(t.labels() == expect);
    CHECK(t.labels() == std::vector<int>{0, 1, 0, 2, 0, 2});
  }
}

TEST_SUITE("linkage") {
  TEST_CASE("two samples") {
    ClusterTree t(2, 2);
    attach(t, 0, {-1, 1}, 1.0);
    t.split_node(0, 0.0, false);
    CHECK(tree::to_linkage(t) == std::vector<tree::LinkageRow>{{0, 1, 1, 2}});
  }

  TEST_CASE("four samples split in pairs") {
    ClusterTree t(4, 2);
    attach(t, 0, {-2, -1, 1, 2}, 1.0);
    t.split_node(0, 0.0, false);
    CHECK(tree::to_linkage(t) ==
          std::vector<tree::LinkageRow>{{0, 1, 1, 2}, {2, 3, 1, 2}, {4, 5, 2, 4}});
  }

  TEST_CASE("bare root chains its samples") {
    const auto rows = tree::to_linkage(ClusterTree(4));
    REQUIRE(rows.size() == 3);
    CHECK(rows.back().size == 4);
    for (const auto& r : rows) CHECK(r.height == 1.0);
  }

  TEST_CASE("grown trees give n-1 rows with monotone heights") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto v = fixtures::random_vector(40, seed);
      ClusterTree t(40, 2);
      tree::grow(t, ColumnGrower(v), 0, 2 + seed % 6);
      const auto rows = tree::to_linkage(t);
      REQUIRE(rows.size() == 39);
      CHECK(rows.back().size == 40);
      std::vector<double> height(40 + rows.size(), 0.0);
      std::vector<int> used(40 + rows.size(), 0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto a = static_cast<std::size_t>(rows[i].a);
        const auto b = static_cast<std::size_t>(rows[i].b);
        CHECK(a < 40 + i);
        CHECK(b < 40 + i);
        CHECK(height[a] <= rows[i].height);
        CHECK(height[b] <= rows[i].height);
        ++used[a];
        ++used[b];
        height[40 + i] = rows[i].height;
      }
      for (std::size_t i = 0; i + 1 < used.size(); ++i) CHECK(used[i] == 1);
    }
  }
}

TEST_SUITE("grow and recompute") {
  const std::vector<double> kValues{0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 10.0, 10.1, 10.2, 20.0, 20.1, 20.3};

  TEST_CASE("grow stops at the leaf budget and keeps the partition invariant") {
    ClusterTree t(kValues.size(), 2);
    tree::grow(t, ColumnGrower(kValues), 0, 4);
    CHECK(t.leaf_count() == 4);
    check_partition(t);
    // Groups of three consecutive samples.
    const auto labels = t.labels();
    for (std::size_t i = 0; i < 12; ++i) CHECK(labels[i] == labels[i - i % 3]);
  }

  TEST_CASE("grow without budget runs until no feasible leaf remains") {
    ClusterTree t(kValues.size(), 3);
    tree::grow(t, ColumnGrower(kValues), 0, std::nullopt);
    for (NodeId id : t.leaves()) CHECK(t.node(id).size() < 3);
    check_partition(t);
  }

  TEST_CASE("recompute at the original point is a no-op") {
    ClusterTree t(kValues.size(), 2);
    ColumnGrower g(kValues);
    tree::grow(t, g, 0, 4);
    const auto labels = t.labels();
    const auto nodes_before = t.nodes().size();
    const NodeId target = t.split_order()[1];
    const double original = *t.node(target).split_point();
    tree::recompute_subtree(t, target, original, g);
    CHECK(t.labels() == labels);
    CHECK(t.nodes().size() == nodes_before);
    CHECK(*t.node(target).manual_split == original);
  }

  TEST_CASE("edits leave everything outside the subtree untouched") {
    ClusterTree t(kValues.size(), 2);
    ColumnGrower g(kValues);
    tree::grow(t, g, 0, 4);
    const auto before = t;
    // The root cuts off {20, 20.1, 20.3}; its left child holds the three
    // lower groups and is re-cut between the first two.
    const NodeId target = t.node(0).children->first;
    REQUIRE(t.node(target).size() == 9);
    tree::recompute_subtree(t, target, 2.6, g);
    CHECK(t.node(target).manual_split == 2.6);
    const auto inside = t.subtree(target);
    for (const auto& [id, n] : before.nodes()) {
      if (std::find(inside.begin(), inside.end(), id) != inside.end()) continue;
      REQUIRE(t.contains(id));
      CHECK(t.node(id).sample_indices == n.sample_indices);
      CHECK(t.node(id).children == n.children);
      CHECK(t.node(id).split_point() == n.split_point());
    }
    CHECK(t.subtree_leaves(target).size() == before.subtree_leaves(target).size());
    check_partition(t);
  }

  TEST_CASE("ancestor manual split survives an edit on a descendant") {
    ClusterTree t(kValues.size(), 2);
    ColumnGrower g(kValues);
    tree::grow(t, g, 0, 4);
    const double root_point = 12.0;
    tree::recompute_subtree(t, 0, root_point, g);
    REQUIRE(*t.node(0).manual_split == root_point);
    const NodeId child = t.node(0).children->first;
    const auto& p = *t.node(child).projection;
    tree::recompute_subtree(t, child, p.min_score + (p.max_score - p.min_score) * 0.3, g);
    CHECK(*t.node(0).manual_split == root_point);
    CHECK(t.node(child).manual_split.has_value());
  }

  TEST_CASE("invalid edits leave the tree unchanged") {
    ClusterTree t(kValues.size(), 2);
    ColumnGrower g(kValues);
    tree::grow(t, g, 0, 4);
    const auto labels = t.labels();
    CHECK(fixtures::error_code_of([&] { tree::recompute_subtree(t, 0, 100.0, g); }) ==
          ErrorCode::kDegenerateSplit);
    CHECK(fixtures::error_code_of([&] { tree::recompute_subtree(t, 99, 1.0, g); }) ==
          ErrorCode::kStructural);
    CHECK(t.labels() == labels);
  }

  TEST_CASE("a failing regrow is rolled back") {
    class Exploding : public ColumnGrower {
     public:
      using ColumnGrower::ColumnGrower;
      void prepare_leaf(ClusterTree& t, NodeId leaf) const override {
        if (armed) throw Error(ErrorCode::kData, "boom");
        ColumnGrower::prepare_leaf(t, leaf);
      }
      bool armed = false;
    };
    ClusterTree t(kValues.size(), 2);
    Exploding g(kValues);
    tree::grow(t, g, 0, 4);
    const auto before = t;
    g.armed = true;
    CHECK_THROWS_AS(tree::recompute_subtree(t, 0, 12.0, g), Error);
    CHECK(t.labels() == before.labels());
    CHECK(t.next_id() == before.next_id());
    CHECK(t.split_order() == before.split_order());
  }

  TEST_CASE("discard, snapshot and restore") {
    ClusterTree t(kValues.size(), 2);
    tree::grow(t, ColumnGrower(kValues), 0, 4);
    const auto snap = t.snapshot(0);
    t.discard_descendants(0);
    CHECK(t.leaf_count() == 1);
    CHECK(t.split_order().empty());
    t.restore(snap);
    CHECK(t.leaf_count() == 4);
    check_partition(t);
  }
}

TEST_CASE("tree builder rejects inconsistent nodes") {
  tree::ClusterNode root;
  root.id = 0;
  root.sample_indices = {0, 1, 2};
  tree::TreeBuilder ok(3, 2, 1, {});
  ok.add(root);
  CHECK(std::move(ok).build().labels() == std::vector<int>{0, 0, 0});

  root.sample_indices = {0, 1};
  tree::TreeBuilder missing(3, 2, 1, {});
  missing.add(root);
  CHECK(fixtures::error_code_of([&] { std::move(missing).build(); }) == ErrorCode::kStructural);
}
