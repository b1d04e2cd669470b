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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "divclust/cluster_tree.hpp"
#include "divclust/matrix.hpp"

namespace divclust::viz {

/// A node's samples in the plane of its splitting axis (x) and the
/// strongest direction orthogonal to it (y).
struct SplitView {
  tree::NodeId node = 0;
  bool leaf = false;
  std::size_t size = 0;
  std::string method;
  std::optional<double> criterion;
  bool feasible = false;
  double split_point = 0.0;  // applied cut, or the proposed one on a leaf
  bool manual = false;
  double min_score = 0.0;
  double max_score = 0.0;
  std::optional<std::pair<tree::NodeId, tree::NodeId>> children;
  std::vector<std::size_t> samples;
  std::vector<std::array<double, 2>> coords;
  std::vector<int> side;  // 1 when coords.x >= split_point
  std::string note;       // why component 2 is zero, when it is
};

/// View of one internal node or prepared leaf; nullopt when the node has no
/// projection.
std::optional<SplitView> node_view(const tree::ClusterTree& tree, const Matrix& x,
                                   tree::NodeId id);

/// One record per internal node, in ascending id order.
std::vector<SplitView> export_split_views(const tree::ClusterTree& tree, const Matrix& x);

nlohmann::json to_json(const SplitView& view);
nlohmann::json views_to_json(const std::vector<SplitView>& views);

/// Throws kData on a wrong row count, bad or reused cluster ids, size
/// mismatches, or a merge lower than one of its children.
void validate_linkage(std::span<const tree::LinkageRow> rows);

/// Sample ids left to right, following the linkage from the last merge.
std::vector<std::size_t> dendrogram_leaf_order(std::span<const tree::LinkageRow> rows);

inline constexpr std::array<const char*, 12> kPalette{
    "steelblue", "darkorange", "forestgreen", "crimson", "mediumpurple", "sienna",
    "orchid",    "gray",       "olive",       "darkturquoise", "navy", "gold"};

/// Class c >= 0 maps to kPalette[c % 12]; negative classes (outliers) are black.
const char* class_color(int label);

struct SvgOptions {
  double width = 800.0;
  double height = 400.0;
  double margin = 30.0;
  double strip_height = 12.0;
};

std::string render_dendrogram_svg(std::span<const tree::LinkageRow> rows,
                                  const std::optional<std::vector<int>>& class_labels = std::nullopt,
                                  const SvgOptions& options = {});

/// Reads the merge rows back out of a document produced by
/// render_dendrogram_svg.
std::vector<tree::LinkageRow> parse_dendrogram_svg(std::string_view svg);

}  // namespace divclust::viz
