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

#include "divclust/serialization.hpp"

#include <cstdio>
#include <string>

#include "divclust/error.hpp"

namespace divclust::serial {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

json kernel_to_json(const linalg::KernelSpec& k) {
  json j{{"type", std::string(linalg::to_string(k.type))},
         {"degree", k.degree},
         {"coef0", k.coef0}};
  j["gamma"] = k.gamma ? json(*k.gamma) : json(nullptr);
  return j;
}

linalg::KernelSpec kernel_from_json(const json& j) {
  linalg::KernelSpec k;
  if (!j.is_object()) fail(ErrorCode::kConfig, "kernel must be an object");
  k.type = linalg::parse_kernel_type(get_or<std::string>(j, "type", "rbf"));
  if (j.contains("gamma") && !j.at("gamma").is_null()) k.gamma = get_or<double>(j, "gamma", 1.0);
  k.degree = get_or<int>(j, "degree", 3);
  k.coef0 = get_or<double>(j, "coef0", 1.0);
  return k;
}

json resolved_kernel_to_json(const linalg::ResolvedKernel& k) {
  return {{"type", std::string(linalg::to_string(k.type))},
          {"gamma", k.gamma},
          {"degree", k.degree},
          {"coef0", k.coef0}};
}

linalg::ResolvedKernel resolved_kernel_from_json(const json& j) {
  linalg::ResolvedKernel k;
  k.type = linalg::parse_kernel_type(j.at("type").get<std::string>());
  k.gamma = j.at("gamma").get<double>();
  k.degree = j.at("degree").get<int>();
  k.coef0 = j.at("coef0").get<double>();
  return k;
}

json candidate_to_json(const split::SplitCandidate& c) {
  return {{"split_point", c.split_point},
          {"criterion", c.criterion},
          {"feasible", c.feasible},
          {"rule", std::string(split::to_string(c.rule))}};
}

split::SplitCandidate candidate_from_json(const json& j) {
  split::SplitCandidate c;
  c.split_point = j.at("split_point").get<double>();
  c.criterion = j.at("criterion").get<double>();
  c.feasible = j.at("feasible").get<bool>();
  c.rule = split::parse_rule(j.at("rule").get<std::string>());
  return c;
}

json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json config_to_json(const algo::AlgorithmConfig& c) {
  json j;
  j["algorithm"] = std::string(algo::to_string(c.algorithm));
  j["max_clusters"] = c.max_clusters ? json(*c.max_clusters) : json(nullptr);
  j["projection"] = {{"method", std::string(proj::to_string(c.projection.method))},
                     {"kernel", kernel_to_json(c.projection.kernel)},
                     {"seed", c.projection.seed},
                     {"components", c.projection.components},
                     {"kpca_max_samples", c.projection.kpca_max_samples},
                     {"power_tol", c.projection.power.tol},
                     {"power_max_iter", c.projection.power.max_iter}};
  j["trim_fraction"] = c.trim_fraction;
  j["bandwidth_scale"] = c.bandwidth_scale;
  j["kde_grid"] = c.kde_grid;
  j["min_sample_split"] = c.min_sample_split;
  j["seed"] = c.seed;
  j["restarts"] = c.restarts;
  j["depddp_fixed_edit_budget"] = c.depddp_fixed_edit_budget;
  return j;
}

algo::AlgorithmConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");
  algo::AlgorithmConfig c;
  c.algorithm = algo::parse_algorithm(get_or<std::string>(doc, "algorithm", "pddp"));
  if (doc.contains("max_clusters") && !doc.at("max_clusters").is_null()) {
    const auto k = get_or<long long>(doc, "max_clusters", 0);
    require(k >= 1, ErrorCode::kConfig, "max_clusters must be >= 1");
    c.max_clusters = static_cast<std::size_t>(k);
  }
  if (doc.contains("projection") && doc.at("projection").is_object()) {
    const json& p = doc.at("projection");
    c.projection.method = proj::parse_method(get_or<std::string>(p, "method", "pca"));
    if (p.contains("kernel") && !p.at("kernel").is_null()) {
      c.projection.kernel = kernel_from_json(p.at("kernel"));
    }
    c.projection.seed = get_or<std::uint64_t>(p, "seed", 0);
    c.projection.components = get_or<int>(p, "components", 1);
    c.projection.kpca_max_samples = get_or<std::size_t>(p, "kpca_max_samples", 20000);
    c.projection.power.tol = get_or<double>(p, "power_tol", 1e-9);
    c.projection.power.max_iter = get_or<std::size_t>(p, "power_max_iter", 1000);
  } else if (doc.contains("projection") && doc.at("projection").is_string()) {
    c.projection.method = proj::parse_method(doc.at("projection").get<std::string>());
  }
  if (doc.contains("kernel") && !doc.at("kernel").is_null()) {
    c.projection.kernel = kernel_from_json(doc.at("kernel"));
  }
  c.trim_fraction = get_or<double>(doc, "trim_fraction", c.trim_fraction);
  c.bandwidth_scale = get_or<double>(doc, "bandwidth_scale", c.bandwidth_scale);
  c.kde_grid = get_or<std::size_t>(doc, "kde_grid", c.kde_grid);
  c.min_sample_split = get_or<std::size_t>(doc, "min_sample_split", c.min_sample_split);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
  c.projection.seed = c.seed;
  if (doc.contains("projection") && doc.at("projection").is_object() &&
      doc.at("projection").contains("seed")) {
    c.projection.seed = get_or<std::uint64_t>(doc.at("projection"), "seed", c.seed);
  }
  c.restarts = get_or<std::size_t>(doc, "restarts", c.restarts);
  c.depddp_fixed_edit_budget = get_or<bool>(doc, "depddp_fixed_edit_budget", false);
  algo::validate(c);
  return c;
}

json model_to_json(const proj::AxisModel& model) {
  struct Visitor {
    json operator()(const proj::LinearAxis& m) const {
      return {{"kind", "linear"}, {"axis", m.axis}, {"offset", m.offset}};
    }
    json operator()(const proj::KernelAxis& m) const {
      return {{"kind", "kernel"},
              {"kernel", resolved_kernel_to_json(m.kernel)},
              {"reference_rows", m.reference_rows},
              {"coefficients", m.coefficients},
              {"row_means", m.row_means},
              {"total_mean", m.total_mean}};
    }
    json operator()(const proj::CentroidAxis& m) const {
      return {{"kind", "centroid"}, {"left", m.left_center}, {"right", m.right_center}};
    }
  };
  return std::visit(Visitor{}, model);
}

proj::AxisModel model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    return proj::LinearAxis{j.at("axis").get<std::vector<double>>(), j.at("offset").get<double>()};
  }
  if (kind == "kernel") {
    proj::KernelAxis m;
    m.kernel = resolved_kernel_from_json(j.at("kernel"));
    m.reference_rows = j.at("reference_rows").get<std::vector<std::size_t>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.row_means = j.at("row_means").get<std::vector<double>>();
    m.total_mean = j.at("total_mean").get<double>();
    return m;
  }
  if (kind == "centroid") {
    return proj::CentroidAxis{j.at("left").get<std::vector<double>>(),
                              j.at("right").get<std::vector<double>>()};
  }
  fail(ErrorCode::kData, "unknown axis model kind '" + kind + "'");
}

json tree_to_json(const tree::ClusterTree& tree, TreeJsonOptions options) {
  json nodes = json::array();
  for (const auto& [id, n] : tree.nodes()) {
    json j;
    j["id"] = id;
    j["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    j["children"] = n.children ? json::array({n.children->first, n.children->second}) : json(nullptr);
    j["depth"] = n.depth;
    j["size"] = n.size();
    j["leaf"] = n.is_leaf();
    if (n.is_leaf()) j["samples"] = n.sample_indices;
    j["prepared"] = n.prepared;
    if (!n.note.empty()) j["note"] = n.note;
    j["candidate"] = n.candidate ? candidate_to_json(*n.candidate) : json(nullptr);
    j["criterion"] = n.candidate ? json(n.candidate->criterion) : json(nullptr);
    j["feasible"] = n.candidate ? n.candidate->feasible : false;
    j["split_point"] = optional_double(n.split_point());
    j["manual_split"] = optional_double(n.manual_split);
    j["manual"] = n.manual_split.has_value();
    if (n.projection) {
      json p{{"method", n.projection->method},
             {"min_score", n.projection->min_score},
             {"max_score", n.projection->max_score}};
      if (options.include_models) p["model"] = model_to_json(n.projection->model);
      j["projection"] = std::move(p);
    } else {
      j["projection"] = nullptr;
    }
    nodes.push_back(std::move(j));
  }
  return {{"format", kTreeFormat},
          {"version", kTreeFormatVersion},
          {"n_samples", tree.n_samples()},
          {"min_sample_split", tree.min_sample_split()},
          {"root", tree.root()},
          {"next_id", tree.next_id()},
          {"split_order", tree.split_order()},
          {"leaf_count", tree.leaf_count()},
          {"nodes", std::move(nodes)}};
}

tree::ClusterTree tree_from_json(const json& doc, std::shared_ptr<const Matrix> training) {
  try {
    require(doc.is_object() && doc.value("format", "") == kTreeFormat, ErrorCode::kData,
            "not a divclust tree document");
    const int version = doc.at("version").get<int>();
    require(version == kTreeFormatVersion, ErrorCode::kData,
            "unsupported tree format version " + std::to_string(version));
    const auto n = doc.at("n_samples").get<std::size_t>();
    if (training) {
      require(training->rows() == n, ErrorCode::kShape,
              "tree has " + std::to_string(n) + " samples but the data has " +
                  std::to_string(training->rows()));
    }
    tree::TreeBuilder builder(n, doc.at("min_sample_split").get<std::size_t>(),
                              doc.at("next_id").get<tree::NodeId>(),
                              doc.at("split_order").get<std::vector<tree::NodeId>>());
    std::vector<tree::ClusterNode> pending;
    for (const json& j : doc.at("nodes")) {
      tree::ClusterNode node;
      node.id = j.at("id").get<tree::NodeId>();
      if (!j.at("children").is_null()) {
        const auto c = j.at("children").get<std::vector<tree::NodeId>>();
        require(c.size() == 2, ErrorCode::kData, "children must be a pair");
        node.children = std::make_pair(c[0], c[1]);
      } else {
        node.sample_indices = j.at("samples").get<std::vector<std::size_t>>();
      }
      node.prepared = j.value("prepared", false);
      node.note = j.value("note", "");
      if (!j.at("candidate").is_null()) node.candidate = candidate_from_json(j.at("candidate"));
      if (!j.at("manual_split").is_null()) node.manual_split = j.at("manual_split").get<double>();
      if (!j.at("projection").is_null() && j.at("projection").contains("model")) {
        const json& p = j.at("projection");
        auto projection = std::make_shared<tree::NodeProjection>();
        projection->method = p.at("method").get<std::string>();
        projection->min_score = p.at("min_score").get<double>();
        projection->max_score = p.at("max_score").get<double>();
        projection->model = model_from_json(p.at("model"));
        node.projection = std::move(projection);
      }
      builder.add(std::move(node));
    }
    tree::ClusterTree tree = std::move(builder).build();
    if (training) {
      // Recompute scores through the same arithmetic used during fit.
      tree::TreeBuilder rebuilt(n, tree.min_sample_split(), tree.next_id(), tree.split_order());
      for (const auto& [id, node] : tree.nodes()) {
        tree::ClusterNode copy = node;
        if (copy.projection) {
          std::vector<double> scores(copy.size());
          for (std::size_t i = 0; i < copy.size(); ++i) {
            scores[i] = proj::score(copy.projection->model, training->row(copy.sample_indices[i]),
                                    *training);
          }
          copy.projection =
              tree::NodeProjection::make(std::move(scores), copy.projection->model,
                                         copy.projection->method);
        }
        rebuilt.add(std::move(copy));
      }
      tree = std::move(rebuilt).build();
      tree.training = std::move(training);
    }
    return tree;
  } catch (const json::exception& e) {
    fail(ErrorCode::kData, std::string("malformed tree document: ") + e.what());
  }
}

json linkage_to_json(std::span<const tree::LinkageRow> rows, std::size_t n_samples) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(json::array({r.a, r.b, r.height, r.size}));
  return {{"format", kLinkageFormat}, {"version", 1}, {"n_samples", n_samples}, {"linkage", out}};
}

std::vector<tree::LinkageRow> linkage_from_json(const json& doc) {
  try {
    const json& rows = doc.is_array() ? doc : doc.at("linkage");
    std::vector<tree::LinkageRow> out;
    for (const json& r : rows) {
      require(r.is_array() && r.size() == 4, ErrorCode::kData, "linkage rows need 4 entries");
      out.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()});
    }
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCode::kData, std::string("malformed linkage document: ") + e.what());
  }
}

std::string labels_digest(std::span<const int> labels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int label : labels) {
    auto v = static_cast<std::uint32_t>(label);
    for (int byte = 0; byte < 4; ++byte) {
      h ^= (v >> (8 * byte)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace divclust::serial
