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

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "divclust/algorithms.hpp"
#include "divclust/cluster_tree.hpp"

// Versioned JSON documents: algorithm configs, trees, linkage.
namespace divclust::serial {

inline constexpr int kTreeFormatVersion = 1;
inline constexpr const char* kTreeFormat = "divclust.tree";
inline constexpr const char* kLinkageFormat = "divclust.linkage";

nlohmann::json config_to_json(const algo::AlgorithmConfig& config);
/// Missing fields keep their defaults; unknown algorithm names, bad types and
/// invalid values raise kConfig.
algo::AlgorithmConfig config_from_json(const nlohmann::json& doc);

struct TreeJsonOptions {
  bool include_models = true;  // axis models, needed for predict and export
};

nlohmann::json tree_to_json(const tree::ClusterTree& tree, TreeJsonOptions options = {});

/// Rebuilds a tree. With `training` the node scores are recomputed from the
/// stored models (bit-identical to the fitted ones) and the matrix is
/// attached for prediction.
tree::ClusterTree tree_from_json(const nlohmann::json& doc,
                                 std::shared_ptr<const Matrix> training = nullptr);

nlohmann::json linkage_to_json(std::span<const tree::LinkageRow> rows, std::size_t n_samples);
std::vector<tree::LinkageRow> linkage_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const proj::AxisModel& model);
proj::AxisModel model_from_json(const nlohmann::json& doc);

/// 64-bit FNV-1a over the label sequence, as 16 hex digits.
std::string labels_digest(std::span<const int> labels);

}  // namespace divclust::serial
