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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "divclust/algorithms.hpp"
#include "divclust/cluster_tree.hpp"
#include "divclust/io.hpp"
#include "divclust/matrix.hpp"

namespace divclust::session {

/// An error with the HTTP status and machine-readable code it maps to.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

struct Edit {
  tree::NodeId node = 0;
  double point = 0.0;
  std::string timestamp;  // UTC, ISO 8601
};

/// fit(config, data) followed by every edit in order.
algo::FitResult replay(const algo::AlgorithmConfig& config, std::shared_ptr<const DataMatrix> data,
                       const std::vector<Edit>& log);

struct ManagerOptions {
  std::optional<std::filesystem::path> data_dir;      // datasets addressable by file name
  std::optional<std::filesystem::path> snapshot_dir;  // config + edit log per session
  std::size_t upload_limit = 64u << 20;               // bytes
};

class SessionManager {
 public:
  explicit SessionManager(ManagerOptions options = {});

  /// Parses an uploaded CSV and returns its descriptor (201 on the wire).
  nlohmann::json upload_dataset(const std::string& csv, const io::LoadOptions& options,
                                std::optional<std::string> name = std::nullopt);
  /// Registers an in-memory dataset under `id`.
  void add_dataset(const std::string& id, std::shared_ptr<const DataMatrix> data);

  nlohmann::json create_session(const nlohmann::json& request);
  nlohmann::json get_tree(const std::string& session_id) const;
  nlohmann::json get_node_view(const std::string& session_id, tree::NodeId node);
  nlohmann::json set_split(const std::string& session_id, tree::NodeId node, double point,
                           std::uint64_t expected_revision);
  nlohmann::json reset(const std::string& session_id);
  nlohmann::json dendrogram(const std::string& session_id) const;
  nlohmann::json edit_log(const std::string& session_id) const;

  /// Rebuilds sessions from the snapshot directory by replay; returns how
  /// many were restored.
  std::size_t restore_snapshots();

  const ManagerOptions& options() const noexcept { return options_; }

 private:
  struct Session {
    std::string id;
    std::string dataset_id;
    std::shared_ptr<const DataMatrix> data;
    algo::AlgorithmConfig config;
    algo::FitResult fitted;
    std::vector<Edit> log;
    std::uint64_t revision = 0;
    mutable std::shared_mutex mutex;
  };

  std::shared_ptr<const DataMatrix> find_dataset(const std::string& id);
  std::shared_ptr<Session> find_session(const std::string& id) const;
  nlohmann::json tree_document(const Session& s) const;
  nlohmann::json summary(const Session& s) const;
  void write_snapshot(const Session& s) const;
  std::string new_token(const char* prefix);

  ManagerOptions options_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<const DataMatrix>> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t token_counter_ = 0;
  std::uint64_t token_salt_;
};

}  // namespace divclust::session
