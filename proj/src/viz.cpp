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

#include "divclust/viz.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <regex>
#include <variant>

#include "divclust/error.hpp"
#include "divclust/io.hpp"
#include "divclust/linalg.hpp"
#include "divclust/projections.hpp"
#include "divclust/simd.hpp"

namespace divclust::viz {

namespace {

using tree::LinkageRow;

// Unit feature-space direction equivalent to a linear or centroid model.
std::optional<std::vector<double>> feature_axis(const proj::AxisModel& model) {
  std::vector<double> axis;
  if (const auto* lin = std::get_if<proj::LinearAxis>(&model)) {
    axis = lin->axis;
  } else if (const auto* cen = std::get_if<proj::CentroidAxis>(&model)) {
    axis = cen->right_center;
    simd::axpy(-1.0, cen->left_center, axis);
  } else {
    return std::nullopt;
  }
  const double norm = std::sqrt(simd::dot(axis, axis));
  if (!(norm > 0.0)) return std::nullopt;
  simd::scale(1.0 / norm, axis);
  return axis;
}

std::vector<double> second_component(const tree::ClusterNode& node, const Matrix& x,
                                     std::string& note) {
  const std::vector<std::size_t>& rows = node.sample_indices;
  std::vector<double> out(rows.size(), 0.0);
  const proj::AxisModel& model = node.projection->model;
  try {
    if (const auto* kernel = std::get_if<proj::KernelAxis>(&model)) {
      linalg::KernelSpec spec;
      spec.type = kernel->kernel.type;
      spec.gamma = kernel->kernel.gamma;
      spec.degree = kernel->kernel.degree;
      spec.coef0 = kernel->kernel.coef0;
      const proj::ProjectionResult two = proj::project_kpca(x, rows, spec, 2);
      if (two.scores.cols() >= 2) return two.column(1);
      note = "no second kernel component";
      return out;
    }
    const auto axis = feature_axis(model);
    if (!axis) {
      note = "splitting axis is degenerate";
      return out;
    }
    const linalg::CenteredRows xc = linalg::CenteredRows::around_mean(x, rows);
    linalg::Direction first{*axis, 0.0};
    linalg::Direction second;
    try {
      second = linalg::secondary_direction(xc, first);
    } catch (const ConvergenceError& e) {
      second.vector = e.last_iterate();
      note = "second direction did not converge; using the last iterate";
    }
    xc.apply(second.vector, out);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroVariance && e.code() != ErrorCode::kRank &&
        e.code() != ErrorCode::kCapacity) {
      throw;
    }
    std::fill(out.begin(), out.end(), 0.0);
    note = e.what();
  }
  return out;
}

std::string num(double v) { return io::format_double(v); }

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::optional<SplitView> node_view(const tree::ClusterTree& tree, const Matrix& x,
                                   tree::NodeId id) {
  const tree::ClusterNode& node = tree.node(id);
  if (!node.projection) return std::nullopt;
  require(x.rows() == tree.n_samples(), ErrorCode::kShape,
          "view data has " + std::to_string(x.rows()) + " rows, tree has " +
              std::to_string(tree.n_samples()));
  SplitView view;
  view.node = id;
  view.leaf = node.is_leaf();
  view.size = node.size();
  view.method = node.projection->method;
  if (node.candidate) {
    view.criterion = node.candidate->criterion;
    view.feasible = node.candidate->feasible;
  }
  const auto point = node.is_leaf() ? (node.candidate ? std::optional(node.candidate->split_point)
                                                      : std::nullopt)
                                    : node.split_point();
  view.split_point = point.value_or(0.0);
  view.manual = node.manual_split.has_value();
  view.min_score = node.projection->min_score;
  view.max_score = node.projection->max_score;
  view.children = node.children;
  view.samples = node.sample_indices;

  std::vector<double> first = node.projection->scores;
  if (first.size() != node.size()) {
    first.resize(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
      first[i] = proj::score(node.projection->model, x.row(node.sample_indices[i]), x);
    }
  }
  const std::vector<double> second = second_component(node, x, view.note);
  view.coords.resize(node.size());
  view.side.resize(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    view.coords[i] = {first[i], second[i]};
    view.side[i] = first[i] >= view.split_point ? 1 : 0;
  }
  return view;
}

std::vector<SplitView> export_split_views(const tree::ClusterTree& tree, const Matrix& x) {
  std::vector<SplitView> views;
  for (const auto& [id, node] : tree.nodes()) {
    if (node.is_leaf()) continue;
    if (auto view = node_view(tree, x, id)) views.push_back(std::move(*view));
  }
  return views;
}

nlohmann::json to_json(const SplitView& v) {
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& c : v.coords) coords.push_back({c[0], c[1]});
  nlohmann::json j{{"node", v.node},
                   {"leaf", v.leaf},
                   {"size", v.size},
                   {"method", v.method},
                   {"feasible", v.feasible},
                   {"split_point", v.split_point},
                   {"manual", v.manual},
                   {"score_range", {v.min_score, v.max_score}},
                   {"samples", v.samples},
                   {"coords", std::move(coords)},
                   {"side", v.side}};
  j["criterion"] = v.criterion ? nlohmann::json(*v.criterion) : nlohmann::json(nullptr);
  j["children"] = v.children ? nlohmann::json::array({v.children->first, v.children->second})
                             : nlohmann::json(nullptr);
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

nlohmann::json views_to_json(const std::vector<SplitView>& views) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& v : views) records.push_back(to_json(v));
  return {{"format", "divclust.views"}, {"version", 1}, {"views", std::move(records)}};
}

void validate_linkage(std::span<const LinkageRow> rows) {
  const std::size_t n = rows.size() + 1;
  std::vector<double> size(n, 1.0);
  std::vector<double> height(n, 0.0);
  std::vector<bool> used(2 * n - 1, false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LinkageRow& r = rows[i];
    const std::string where = "linkage row " + std::to_string(i);
    const double limit = static_cast<double>(n + i);
    for (double id : {r.a, r.b}) {
      require(std::isfinite(id) && id >= 0.0 && id < limit && id == std::floor(id),
              ErrorCode::kData, where + ": bad cluster id " + num(id));
      const auto k = static_cast<std::size_t>(id);
      require(!used[k], ErrorCode::kData, where + ": cluster " + num(id) + " merged twice");
      used[k] = true;
    }
    require(r.a != r.b, ErrorCode::kData, where + ": merges a cluster with itself");
    const auto a = static_cast<std::size_t>(r.a);
    const auto b = static_cast<std::size_t>(r.b);
    require(std::isfinite(r.height) && r.height >= 0.0, ErrorCode::kData, where + ": bad height");
    require(r.height >= height[a] && r.height >= height[b], ErrorCode::kData,
            where + ": height is below a child's height");
    require(r.size == size[a] + size[b], ErrorCode::kData, where + ": size mismatch");
    size.push_back(r.size);
    height.push_back(r.height);
  }
}

std::vector<std::size_t> dendrogram_leaf_order(std::span<const LinkageRow> rows) {
  const std::size_t n = rows.size() + 1;
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> stack{2 * n - 2};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (id < n) {
      order.push_back(id);
      continue;
    }
    const LinkageRow& r = rows[id - n];
    stack.push_back(static_cast<std::size_t>(r.b));
    stack.push_back(static_cast<std::size_t>(r.a));
  }
  return order;
}

const char* class_color(int label) {
  if (label < 0) return "black";
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

std::string render_dendrogram_svg(std::span<const LinkageRow> rows,
                                  const std::optional<std::vector<int>>& class_labels,
                                  const SvgOptions& o) {
  validate_linkage(rows);
  const std::size_t n = rows.size() + 1;
  if (class_labels) {
    require(class_labels->size() == n, ErrorCode::kShape,
            "class labels have " + std::to_string(class_labels->size()) + " entries for " +
                std::to_string(n) + " samples");
  }
  const double strip = class_labels ? o.strip_height + 4.0 : 0.0;
  const double plot_w = o.width - 2.0 * o.margin;
  const double plot_h = o.height - 2.0 * o.margin - strip;
  require(plot_w > 0.0 && plot_h > 0.0, ErrorCode::kConfig, "SVG canvas too small");
  double top = 0.0;
  for (const auto& r : rows) top = std::max(top, r.height);
  if (top <= 0.0) top = 1.0;
  const double base_y = o.margin + plot_h;
  auto y_of = [&](double h) { return o.margin + (1.0 - h / top) * plot_h; };

  const std::vector<std::size_t> order = dendrogram_leaf_order(rows);
  const double cell = plot_w / static_cast<double>(n);
  std::vector<double> x(2 * n - 1, 0.0);
  std::vector<double> h(2 * n - 1, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    x[order[pos]] = o.margin + (static_cast<double>(pos) + 0.5) * cell;
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:dc=\"urn:divclust:dendrogram\" "
         "version=\"1.1\" width=\"" + coord(o.width) + "\" height=\"" + coord(o.height) +
         "\" viewBox=\"0 0 " + coord(o.width) + " " + coord(o.height) + "\" dc:samples=\"" +
         std::to_string(n) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + coord(o.width) + "\" height=\"" + coord(o.height) +
         "\" fill=\"white\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + coord(o.margin) + "\" y1=\"" + coord(base_y) + "\" x2=\"" +
         coord(o.margin + plot_w) + "\" y2=\"" + coord(base_y) + "\" stroke=\"#999\"/>\n";
  svg += "<g class=\"merges\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\">\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LinkageRow& r = rows[i];
    const auto a = static_cast<std::size_t>(r.a);
    const auto b = static_cast<std::size_t>(r.b);
    const double ym = y_of(r.height);
    svg += "<path class=\"merge\" dc:a=\"" + num(r.a) + "\" dc:b=\"" + num(r.b) +
           "\" dc:height=\"" + num(r.height) + "\" dc:size=\"" + num(r.size) + "\" d=\"M " +
           coord(x[a]) + " " + coord(y_of(h[a])) + " V " + coord(ym) + " H " + coord(x[b]) +
           " V " + coord(y_of(h[b])) + "\"/>\n";
    x[n + i] = (x[a] + x[b]) / 2.0;
    h[n + i] = r.height;
  }
  svg += "</g>\n";
  if (class_labels) {
    svg += "<g class=\"strip\">\n";
    const double y = base_y + 4.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t s = order[pos];
      const int label = (*class_labels)[s];
      svg += "<rect class=\"cell\" dc:sample=\"" + std::to_string(s) + "\" dc:class=\"" +
             std::to_string(label) + "\" x=\"" + coord(o.margin + static_cast<double>(pos) * cell) +
             "\" y=\"" + coord(y) + "\" width=\"" + coord(cell) + "\" height=\"" +
             coord(o.strip_height) + "\" fill=\"" + class_color(label) + "\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<LinkageRow> parse_dendrogram_svg(std::string_view svg) {
  static const std::regex merge(
      R"re(<path class="merge" dc:a="([^"]+)" dc:b="([^"]+)" dc:height="([^"]+)" dc:size="([^"]+)")re");
  auto to_double = [](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::kData,
            "bad number '" + s + "' in dendrogram SVG");
    return v;
  };
  std::vector<LinkageRow> rows;
  const std::string text(svg);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), merge); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    rows.push_back({to_double(m[1]), to_double(m[2]), to_double(m[3]), to_double(m[4])});
  }
  return rows;
}

}  // namespace divclust::viz
