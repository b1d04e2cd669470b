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

// Command-line entry point: fit, bench, export, generate and serve.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "divclust/algorithms.hpp"
#include "divclust/error.hpp"
#include "divclust/evaluation.hpp"
#include "divclust/io.hpp"
#include "divclust/serialization.hpp"
#include "divclust/server.hpp"
#include "divclust/session.hpp"
#include "divclust/version.hpp"
#include "divclust/viz.hpp"

namespace {

using namespace divclust;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

enum class LogLevel { kQuiet = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level() {
  const char* env = std::getenv("DIVCLUST_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  const std::string v(env);
  if (v == "quiet" || v == "0") return LogLevel::kQuiet;
  if (v == "info" || v == "2") return LogLevel::kInfo;
  if (v == "debug" || v == "3") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void log(LogLevel level, const std::string& message) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  const char* tag = level == LogLevel::kWarn ? "warning" : level == LogLevel::kInfo ? "info" : "debug";
  std::cerr << "divclust: " << tag << ": " << message << '\n';
}

struct InputFlags {
  std::string path;
  bool header = false;
  std::string delimiter = "auto";
  std::optional<std::size_t> label_column;
  std::string label_file;

  void add_to(CLI::App& app, bool required) {
    auto* opt = app.add_option("--input", path, "CSV/TSV data file");
    if (required) opt->required();
    app.add_flag("--header", header, "First line is a header");
    app.add_option("--delimiter", delimiter, "comma, tab or auto")
        ->check(CLI::IsMember({"auto", "comma", "tab"}));
    app.add_option("--label-column", label_column, "0-based column holding class labels");
    app.add_option("--label-file", label_file, "Class labels, one per line");
  }

  io::LoadOptions options() const {
    io::LoadOptions o;
    o.header = header;
    o.delimiter = delimiter == "tab"     ? io::Delimiter::kTab
                  : delimiter == "comma" ? io::Delimiter::kComma
                                         : io::Delimiter::kAuto;
    o.label_column = label_column;
    if (!label_file.empty()) o.label_file = label_file;
    return o;
  }
};

struct FitFlags {
  std::string algorithm;
  std::optional<std::size_t> k;
  std::string projection = "pca";
  std::string kernel = "rbf";
  std::optional<double> gamma;
  int degree = 3;
  double coef0 = 1.0;
  double trim = 0.1;
  double bandwidth_scale = 1.0;
  std::size_t kde_grid = 512;
  std::size_t min_sample_split = 5;
  std::uint64_t seed = 0;
  std::size_t restarts = 3;
  bool depddp_fixed_edit_budget = false;
  std::string labels_out;
  std::string tree_out;

  algo::AlgorithmConfig config() const {
    algo::AlgorithmConfig c;
    c.algorithm = algo::parse_algorithm(algorithm);
    c.max_clusters = k;
    c.projection.method = proj::parse_method(projection);
    c.projection.kernel.type = linalg::parse_kernel_type(kernel);
    c.projection.kernel.gamma = gamma;
    c.projection.kernel.degree = degree;
    c.projection.kernel.coef0 = coef0;
    c.projection.seed = seed;
    c.trim_fraction = trim;
    c.bandwidth_scale = bandwidth_scale;
    c.kde_grid = kde_grid;
    c.min_sample_split = min_sample_split;
    c.seed = seed;
    c.restarts = restarts;
    c.depddp_fixed_edit_budget = depddp_fixed_edit_budget;
    algo::validate(c);
    return c;
  }
};

int cmd_fit(const FitFlags& flags, const InputFlags& input) {
  const algo::AlgorithmConfig config = flags.config();
  auto data = std::make_shared<const DataMatrix>(io::load_matrix(input.path, input.options()));
  log(LogLevel::kInfo, "loaded " + std::to_string(data->rows()) + "x" + std::to_string(data->cols()));
  const algo::FitResult result = algo::fit(config, data);
  if (result.status == algo::FitStatus::kStoppedEarly) log(LogLevel::kWarn, result.warning);
  log(LogLevel::kInfo, "fitted " + std::to_string(result.tree.leaf_count()) + " clusters");

  const std::string labels = io::format_labels(result.labels);
  if (flags.labels_out.empty()) {
    std::cout << labels;
  } else {
    io::write_file_atomic(flags.labels_out, labels);
  }
  if (!flags.tree_out.empty()) {
    json doc = serial::tree_to_json(result.tree);
    doc["config"] = serial::config_to_json(config);
    io::write_file_atomic(flags.tree_out, doc.dump(1));
  }
  if (data->labels()) {
    log(LogLevel::kInfo, "nmi vs labels " + std::to_string(eval::nmi(result.labels, *data->labels())));
  }
  return 0;
}

std::shared_ptr<const DataMatrix> bench_dataset(const json& spec, const fs::path& base,
                                                std::string& path_out) {
  if (spec.contains("generate")) {
    const json& g = spec.at("generate");
    const std::string kind = g.value("kind", "blobs");
    const auto seed = g.value<std::uint64_t>("seed", 0);
    if (kind == "blobs") {
      return std::make_shared<const DataMatrix>(io::make_blobs(
          g.at("n").get<std::size_t>(), g.at("d").get<std::size_t>(), g.at("k").get<std::size_t>(),
          g.value("separation", 10.0), g.value("spread", 1.0), seed));
    }
    if (kind == "rings") {
      return std::make_shared<const DataMatrix>(io::make_rings(g.at("n").get<std::size_t>(), seed));
    }
    fail(ErrorCode::kConfig, "unknown generator '" + kind + "'");
  }
  fs::path path = spec.at("path").get<std::string>();
  if (path.is_relative()) path = base / path;
  io::LoadOptions load;
  load.header = spec.value("header", false);
  if (spec.contains("label_column")) load.label_column = spec.at("label_column").get<std::size_t>();
  if (spec.contains("label_file")) {
    fs::path lf = spec.at("label_file").get<std::string>();
    if (lf.is_relative()) lf = base / lf;
    load.label_file = lf.string();
  }
  const std::string delim = spec.value("delimiter", "auto");
  if (delim == "tab") load.delimiter = io::Delimiter::kTab;
  if (delim == "comma") load.delimiter = io::Delimiter::kComma;
  // The baseline reads plain feature CSVs only.
  if (!load.label_column && !load.header && delim != "tab") path_out = path.string();
  return std::make_shared<const DataMatrix>(io::load_matrix(path.string(), load));
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              std::optional<std::size_t> repetitions) {
  json doc;
  try {
    doc = json::parse(io::read_file(config_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("bench config is not valid JSON: ") + e.what());
  }
  const fs::path base = fs::path(config_path).parent_path();
  std::vector<eval::BenchDataset> datasets;
  std::vector<eval::BenchConfig> configs;
  eval::BenchOptions options;
  try {
    for (const json& d : doc.at("datasets")) {
      eval::BenchDataset ds;
      ds.name = d.at("name").get<std::string>();
      ds.data = bench_dataset(d, base, ds.source_path);
      datasets.push_back(std::move(ds));
    }
    for (const json& c : doc.at("configs")) {
      eval::BenchConfig bc;
      bc.config = serial::config_from_json(c);
      bc.name = c.value("name", std::string(algo::to_string(bc.config.algorithm)));
      configs.push_back(std::move(bc));
    }
    options.repetitions = doc.value<std::size_t>("repetitions", 1);
    options.warmup = doc.value("warmup", true);
    if (doc.contains("baseline")) {
      options.baseline_command = doc.at("baseline").at("command").get<std::string>();
      options.baseline_name = doc.at("baseline").value("name", "baseline");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("bench config: ") + e.what());
  }
  if (repetitions) options.repetitions = *repetitions;
  require(options.repetitions >= 1, ErrorCode::kConfig, "repetitions must be >= 1");

  const eval::BenchReport report = eval::bench(datasets, configs, options);
  fs::create_directories(out_dir);
  io::write_file_atomic((fs::path(out_dir) / "bench.json").string(), eval::to_json(report).dump(2));
  const std::string table = eval::to_text_table(report);
  io::write_file_atomic((fs::path(out_dir) / "bench.txt").string(), table);
  std::cout << table;
  for (const auto& cell : report.cells) {
    if (!cell.warning.empty()) log(LogLevel::kWarn, cell.algorithm + " on " + cell.dataset + ": " + cell.warning);
  }
  return 0;
}

struct ExportFlags {
  std::string tree;
  std::string dendrogram;
  std::string views;
  std::string linkage;
  std::string labels;
};

int cmd_export(const ExportFlags& flags, const InputFlags& input) {
  json doc;
  try {
    doc = json::parse(io::read_file(flags.tree));
  } catch (const json::exception& e) {
    fail(ErrorCode::kData, std::string("tree file is not valid JSON: ") + e.what());
  }
  std::shared_ptr<const DataMatrix> data;
  if (!input.path.empty()) {
    data = std::make_shared<const DataMatrix>(io::load_matrix(input.path, input.options()));
  }
  std::shared_ptr<const Matrix> training;
  if (data) training = std::shared_ptr<const Matrix>(data, &data->matrix());
  const tree::ClusterTree tree = serial::tree_from_json(doc, training);
  const auto rows = tree::to_linkage(tree);

  if (!flags.linkage.empty()) {
    io::write_file_atomic(flags.linkage, serial::linkage_to_json(rows, tree.n_samples()).dump(1));
  }
  if (!flags.dendrogram.empty()) {
    std::optional<std::vector<int>> classes;
    if (!flags.labels.empty()) {
      classes = io::load_labels(flags.labels);
    } else if (data && data->labels()) {
      classes = data->labels();
    }
    io::write_file_atomic(flags.dendrogram, viz::render_dendrogram_svg(rows, classes));
  }
  if (!flags.views.empty()) {
    require(data != nullptr, ErrorCode::kConfig, "--views needs --input");
    io::write_file_atomic(flags.views, viz::views_to_json(viz::export_split_views(tree, data->matrix())).dump(1));
  }
  return 0;
}

struct GenerateFlags {
  std::string kind = "blobs";
  std::size_t n = 300;
  std::size_t d = 2;
  std::size_t k = 3;
  double separation = 10.0;
  double spread = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  bool with_labels = false;
  std::string labels_out;
};

int cmd_generate(const GenerateFlags& flags) {
  DataMatrix data = flags.kind == "rings"
                        ? io::make_rings(flags.n, flags.seed)
                        : io::make_blobs(flags.n, flags.d, flags.k, flags.separation, flags.spread,
                                         flags.seed);
  io::save_matrix(flags.out, data, {.delimiter = ',', .include_labels = flags.with_labels});
  if (!flags.labels_out.empty()) io::write_file_atomic(flags.labels_out, io::format_labels(*data.labels()));
  return 0;
}

server::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string ui_dir;
  std::string snapshot_dir;
  std::size_t upload_limit_mb = 64;
};

int cmd_serve(const ServeFlags& flags) {
  session::ManagerOptions mo;
  if (!flags.data_dir.empty()) mo.data_dir = flags.data_dir;
  if (!flags.snapshot_dir.empty()) mo.snapshot_dir = flags.snapshot_dir;
  mo.upload_limit = flags.upload_limit_mb << 20;
  session::SessionManager sessions(mo);
  const std::size_t restored = sessions.restore_snapshots();
  if (restored > 0) log(LogLevel::kInfo, "restored " + std::to_string(restored) + " sessions");

  server::ServerOptions so;
  so.host = flags.host;
  so.port = flags.port;
  if (!flags.ui_dir.empty()) so.ui_dir = flags.ui_dir;
  server::HttpServer http(sessions, so);
  const int port = http.bind();
  std::cout << "listening on http://" << flags.host << ":" << port << std::endl;
  g_server = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  http.run();
  g_server = nullptr;
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return kExitConfig;
    case ErrorCode::kData:
    case ErrorCode::kShape:
    case ErrorCode::kCapacity: return kExitData;
    default: return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divclust: divisive hierarchical clustering"};
  app.set_version_flag("--version", std::string("divclust ") + divclust::version());
  app.require_subcommand(1);

  FitFlags fit;
  InputFlags fit_input;
  auto* fit_cmd = app.add_subcommand("fit", "Cluster a data file and write labels");
  fit_input.add_to(*fit_cmd, true);
  fit_cmd->add_option("--algorithm", fit.algorithm, "pddp, depddp, ipddp, km_pddp or bkm")->required();
  fit_cmd->add_option("--k", fit.k, "Number of clusters (max_clusters)");
  fit_cmd->add_option("--projection", fit.projection, "pca, kpca or ica");
  fit_cmd->add_option("--kernel", fit.kernel, "kpca kernel: linear, rbf, poly or sigmoid");
  fit_cmd->add_option("--gamma", fit.gamma, "Kernel gamma (default 1/d)");
  fit_cmd->add_option("--degree", fit.degree, "Polynomial kernel degree");
  fit_cmd->add_option("--coef0", fit.coef0, "Polynomial/sigmoid kernel offset");
  fit_cmd->add_option("--trim", fit.trim, "ipddp trim fraction per tail");
  fit_cmd->add_option("--bandwidth-scale", fit.bandwidth_scale, "depddp bandwidth multiplier");
  fit_cmd->add_option("--kde-grid", fit.kde_grid, "depddp density grid size");
  fit_cmd->add_option("--min-sample-split", fit.min_sample_split, "Smallest splittable leaf");
  fit_cmd->add_option("--seed", fit.seed, "Seed for every stochastic step");
  fit_cmd->add_option("--restarts", fit.restarts, "bkm 2-means restarts");
  fit_cmd->add_flag("--depddp-fixed-edit-budget", fit.depddp_fixed_edit_budget,
                    "Keep the leaf count of subtrees regrown after an edit");
  fit_cmd->add_option("--labels-out", fit.labels_out, "Label file (default: stdout)");
  fit_cmd->add_option("--tree-out", fit.tree_out, "Tree JSON output");

  std::string bench_config;
  std::string bench_out;
  std::optional<std::size_t> bench_reps;
  auto* bench_cmd = app.add_subcommand("bench", "Time and score configurations on datasets");
  bench_cmd->add_option("--config", bench_config, "bench.json")->required();
  bench_cmd->add_option("--out", bench_out, "Output directory")->required();
  bench_cmd->add_option("--repetitions", bench_reps, "Override the repetition count");

  ExportFlags exp;
  InputFlags exp_input;
  auto* export_cmd = app.add_subcommand("export", "Write dendrogram, views or linkage for a tree");
  exp_input.add_to(*export_cmd, false);
  export_cmd->add_option("--tree", exp.tree, "Tree JSON from fit --tree-out")->required();
  export_cmd->add_option("--dendrogram", exp.dendrogram, "SVG output");
  export_cmd->add_option("--views", exp.views, "Split views JSON output");
  export_cmd->add_option("--linkage", exp.linkage, "Linkage JSON output");
  export_cmd->add_option("--labels", exp.labels, "Class labels for the color strip");

  GenerateFlags gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
  gen_cmd->add_option("--kind", gen.kind)->check(CLI::IsMember({"blobs", "rings"}));
  gen_cmd->add_option("--n", gen.n);
  gen_cmd->add_option("--d", gen.d);
  gen_cmd->add_option("--k", gen.k);
  gen_cmd->add_option("--separation", gen.separation);
  gen_cmd->add_option("--spread", gen.spread);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out)->required();
  gen_cmd->add_flag("--with-labels", gen.with_labels, "Write labels as column 0");
  gen_cmd->add_option("--labels-out", gen.labels_out, "Also write labels to this file");

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the interactive session server");
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--data-dir", serve.data_dir, "Datasets addressable by file name");
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "Static UI assets");
  serve_cmd->add_option("--snapshot-dir", serve.snapshot_dir, "Persist sessions as config + edit log");
  serve_cmd->add_option("--upload-limit-mb", serve.upload_limit_mb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, fit_input);
    if (bench_cmd->parsed()) return cmd_bench(bench_config, bench_out, bench_reps);
    if (export_cmd->parsed()) return cmd_export(exp, exp_input);
    if (gen_cmd->parsed()) return cmd_generate(gen);
    if (serve_cmd->parsed()) return cmd_serve(serve);
  } catch (const divclust::Error& e) {
    std::cerr << "divclust: error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "divclust: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
