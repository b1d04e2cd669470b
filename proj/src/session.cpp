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

#include "divclust/session.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <random>

#include "divclust/error.hpp"
#include "divclust/prng.hpp"
#include "divclust/serialization.hpp"
#include "divclust/viz.hpp"

namespace divclust::session {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

bool safe_name(const std::string& id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

json edit_to_json(const Edit& e) {
  return {{"node", e.node}, {"point", e.point}, {"timestamp", e.timestamp}};
}

[[noreturn]] void not_found(const std::string& what) { throw ApiError(404, "not_found", what); }

}  // namespace

algo::FitResult replay(const algo::AlgorithmConfig& config, std::shared_ptr<const DataMatrix> data,
                       const std::vector<Edit>& log) {
  algo::FitResult result = algo::fit(config, std::move(data));
  for (const Edit& e : log) algo::edit_split(result.tree, config, e.node, e.point);
  result.labels = result.tree.labels();
  return result;
}

SessionManager::SessionManager(ManagerOptions options) : options_(std::move(options)) {
  std::random_device rd;
  token_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (options_.snapshot_dir) fs::create_directories(*options_.snapshot_dir / "datasets");
}

std::string SessionManager::new_token(const char* prefix) {
  std::uint64_t state = token_salt_ + (++token_counter_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%016llx", prefix,
                static_cast<unsigned long long>(splitmix64(state)));
  return buf;
}

void SessionManager::add_dataset(const std::string& id, std::shared_ptr<const DataMatrix> data) {
  std::unique_lock lock(registry_mutex_);
  datasets_[id] = std::move(data);
}

json SessionManager::upload_dataset(const std::string& csv, const io::LoadOptions& options,
                                    std::optional<std::string> name) {
  if (csv.size() > options_.upload_limit) {
    throw ApiError(413, "payload_too_large",
                   "upload of " + std::to_string(csv.size()) + " bytes exceeds the limit of " +
                       std::to_string(options_.upload_limit));
  }
  if (name && !safe_name(*name)) {
    throw ApiError(400, "bad_request", "dataset names may use letters, digits, '-', '_' and '.'");
  }
  if (options.label_file) throw ApiError(400, "bad_request", "label files cannot be uploaded");
  std::shared_ptr<const DataMatrix> data;
  try {
    data = std::make_shared<const DataMatrix>(io::parse_matrix(csv, options));
  } catch (const Error& e) {
    throw ApiError(400, "invalid_dataset", e.what());
  }
  std::string id;
  {
    std::unique_lock lock(registry_mutex_);
    id = name ? *name : new_token("d");
    if (datasets_.count(id)) throw ApiError(409, "conflict", "dataset '" + id + "' already exists");
    datasets_[id] = data;
  }
  if (options_.snapshot_dir) {
    const fs::path base = *options_.snapshot_dir / "datasets" / id;
    io::save_matrix(base.string() + ".csv", *data, {.delimiter = ',', .include_labels = false});
    if (data->labels()) io::write_file_atomic(base.string() + ".labels", io::format_labels(*data->labels()));
  }
  return {{"dataset_id", id},
          {"rows", data->rows()},
          {"cols", data->cols()},
          {"has_labels", data->labels().has_value()}};
}

std::shared_ptr<const DataMatrix> SessionManager::find_dataset(const std::string& id) {
  {
    std::shared_lock lock(registry_mutex_);
    const auto it = datasets_.find(id);
    if (it != datasets_.end()) return it->second;
  }
  if (!options_.data_dir || !safe_name(id)) not_found("unknown dataset '" + id + "'");
  for (const char* ext : {"", ".csv", ".tsv"}) {
    const fs::path path = *options_.data_dir / (id + ext);
    if (!fs::is_regular_file(path)) continue;
    io::LoadOptions load;
    fs::path labels = path;
    labels.replace_extension(".labels");
    if (fs::is_regular_file(labels)) load.label_file = labels.string();
    std::shared_ptr<const DataMatrix> data;
    try {
      data = std::make_shared<const DataMatrix>(io::load_matrix(path.string(), load));
    } catch (const Error& e) {
      throw ApiError(400, "invalid_dataset", e.what());
    }
    std::unique_lock lock(registry_mutex_);
    return datasets_.try_emplace(id, data).first->second;
  }
  not_found("unknown dataset '" + id + "'");
}

std::shared_ptr<SessionManager::Session> SessionManager::find_session(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) not_found("unknown session '" + id + "'");
  return it->second;
}

json SessionManager::summary(const Session& s) const {
  const auto& t = s.fitted.tree;
  json j{{"session_id", s.id},
         {"dataset_id", s.dataset_id},
         {"revision", s.revision},
         {"node_count", t.nodes().size()},
         {"leaf_count", t.leaf_count()},
         {"labels_digest", serial::labels_digest(s.fitted.labels)},
         {"config", serial::config_to_json(s.config)},
         {"edits", s.log.size()}};
  if (!s.fitted.warning.empty()) j["warning"] = s.fitted.warning;
  return j;
}

json SessionManager::tree_document(const Session& s) const {
  json j = summary(s);
  j["tree"] = serial::tree_to_json(s.fitted.tree);
  j["labels"] = s.fitted.labels;
  return j;
}

void SessionManager::write_snapshot(const Session& s) const {
  if (!options_.snapshot_dir) return;
  json log = json::array();
  for (const Edit& e : s.log) log.push_back(edit_to_json(e));
  const json doc{{"format", "divclust.session"},
                 {"version", 1},
                 {"session_id", s.id},
                 {"dataset_id", s.dataset_id},
                 {"config", serial::config_to_json(s.config)},
                 {"revision", s.revision},
                 {"edits", std::move(log)}};
  io::write_file_atomic((*options_.snapshot_dir / (s.id + ".json")).string(), doc.dump(2));
}

json SessionManager::create_session(const json& request) {
  if (!request.is_object() || !request.contains("dataset_id") ||
      !request.at("dataset_id").is_string()) {
    throw ApiError(400, "bad_request", "request needs a string 'dataset_id'");
  }
  algo::AlgorithmConfig config;
  try {
    config = serial::config_from_json(request.value("config", json::object()));
  } catch (const Error& e) {
    throw ApiError(400, "invalid_config", e.what());
  }
  const std::string dataset_id = request.at("dataset_id").get<std::string>();
  auto data = find_dataset(dataset_id);

  auto s = std::make_shared<Session>();
  s->dataset_id = dataset_id;
  s->data = data;
  s->config = config;
  try {
    s->fitted = algo::fit(config, data);
  } catch (const Error& e) {
    throw ApiError(e.code() == ErrorCode::kConfig ? 400 : 422,
                   e.code() == ErrorCode::kConfig ? "invalid_config" : "fit_failed", e.what());
  }
  {
    std::unique_lock lock(registry_mutex_);
    s->id = new_token("s");
    sessions_[s->id] = s;
  }
  write_snapshot(*s);
  return summary(*s);
}

json SessionManager::get_tree(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::shared_lock lock(s->mutex);
  return tree_document(*s);
}

json SessionManager::get_node_view(const std::string& session_id, tree::NodeId node) {
  auto s = find_session(session_id);
  {
    std::shared_lock lock(s->mutex);
    if (!s->fitted.tree.contains(node)) not_found("unknown node " + std::to_string(node));
  }
  {
    // Leaves are projected on first use; this fills a cache and leaves the
    // revision alone.
    std::unique_lock lock(s->mutex);
    if (!s->fitted.tree.node(node).prepared) {
      algo::AlgorithmGrower grower(s->config, s->fitted.tree.training);
      tree::ensure_prepared(s->fitted.tree, grower, node);
    }
  }
  std::shared_lock lock(s->mutex);
  const auto view = viz::node_view(s->fitted.tree, s->data->matrix(), node);
  if (!view) {
    const std::string& note = s->fitted.tree.node(node).note;
    throw ApiError(409, "no_projection",
                   "node " + std::to_string(node) + " has no projection" +
                       (note.empty() ? std::string() : " (" + note + ")"));
  }
  json j = viz::to_json(*view);
  j["session_id"] = s->id;
  j["revision"] = s->revision;
  return j;
}

json SessionManager::set_split(const std::string& session_id, tree::NodeId node, double point,
                               std::uint64_t expected_revision) {
  auto s = find_session(session_id);
  std::unique_lock lock(s->mutex);
  if (expected_revision != s->revision) {
    throw ApiError(409, "revision_conflict",
                   "expected revision " + std::to_string(expected_revision) + " but the session is at " +
                       std::to_string(s->revision));
  }
  if (!s->fitted.tree.contains(node)) not_found("unknown node " + std::to_string(node));
  if (!std::isfinite(point)) throw ApiError(422, "point_out_of_range", "split point must be finite");

  tree::ClusterTree working = s->fitted.tree;
  try {
    algo::edit_split(working, s->config, node, point);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateSplit) throw ApiError(422, "point_out_of_range", e.what());
    if (e.code() == ErrorCode::kStructural) throw ApiError(409, "no_projection", e.what());
    throw;
  }
  s->fitted.tree = std::move(working);
  s->fitted.labels = s->fitted.tree.labels();
  s->log.push_back({node, point, utc_now()});
  ++s->revision;
  write_snapshot(*s);
  return tree_document(*s);
}

json SessionManager::reset(const std::string& session_id) {
  auto s = find_session(session_id);
  std::unique_lock lock(s->mutex);
  s->fitted = algo::fit(s->config, s->data);
  s->log.clear();
  ++s->revision;
  write_snapshot(*s);
  return tree_document(*s);
}

json SessionManager::dendrogram(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::shared_lock lock(s->mutex);
  const auto rows = tree::to_linkage(s->fitted.tree);
  json j = serial::linkage_to_json(rows, s->fitted.tree.n_samples());
  j["session_id"] = s->id;
  j["revision"] = s->revision;
  j["labels"] = s->fitted.labels;
  j["leaf_order"] = viz::dendrogram_leaf_order(rows);
  j["class_labels"] = s->data->labels() ? json(*s->data->labels()) : json(nullptr);
  json palette = json::array();
  for (const char* c : viz::kPalette) palette.push_back(c);
  j["palette"] = std::move(palette);
  return j;
}

json SessionManager::edit_log(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::shared_lock lock(s->mutex);
  json log = json::array();
  for (const Edit& e : s->log) log.push_back(edit_to_json(e));
  return {{"session_id", s->id}, {"revision", s->revision}, {"edits", std::move(log)}};
}

std::size_t SessionManager::restore_snapshots() {
  if (!options_.snapshot_dir) return 0;
  const fs::path dir = *options_.snapshot_dir;
  for (const auto& entry : fs::directory_iterator(dir / "datasets")) {
    if (entry.path().extension() != ".csv") continue;
    io::LoadOptions load;
    fs::path labels = entry.path();
    labels.replace_extension(".labels");
    if (fs::is_regular_file(labels)) load.label_file = labels.string();
    add_dataset(entry.path().stem().string(),
                std::make_shared<const DataMatrix>(io::load_matrix(entry.path().string(), load)));
  }
  std::size_t restored = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    const json doc = json::parse(io::read_file(entry.path().string()));
    auto s = std::make_shared<Session>();
    s->id = doc.at("session_id").get<std::string>();
    s->dataset_id = doc.at("dataset_id").get<std::string>();
    s->config = serial::config_from_json(doc.at("config"));
    s->revision = doc.at("revision").get<std::uint64_t>();
    for (const json& e : doc.at("edits")) {
      s->log.push_back({e.at("node").get<tree::NodeId>(), e.at("point").get<double>(),
                        e.at("timestamp").get<std::string>()});
    }
    s->data = find_dataset(s->dataset_id);
    s->fitted = replay(s->config, s->data, s->log);
    std::unique_lock lock(registry_mutex_);
    sessions_[s->id] = std::move(s);
    ++restored;
  }
  return restored;
}

}  // namespace divclust::session
