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

#include "divclust/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "divclust/error.hpp"
#include "divclust/io.hpp"
#include "divclust/serialization.hpp"

namespace divclust::eval {

namespace {

std::vector<int> dense(std::span<const int> labels, std::size_t& count) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = ids.try_emplace(labels[i], static_cast<int>(ids.size())).first->second;
  }
  count = ids.size();
  return out;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

bool needs_k(algo::Algorithm a) { return a != algo::Algorithm::kDepddp; }

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), ErrorCode::kShape,
          "label lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  require(!a.empty(), ErrorCode::kShape, "labelings must be non-empty");
  std::size_t ka = 0;
  std::size_t kb = 0;
  const std::vector<int> da = dense(a, ka);
  const std::vector<int> db = dense(b, kb);
  const auto n = static_cast<double>(a.size());

  std::vector<double> table(ka * kb, 0.0);
  std::vector<double> ca(ka, 0.0);
  std::vector<double> cb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[static_cast<std::size_t>(da[i]) * kb + static_cast<std::size_t>(db[i])] += 1.0;
    ca[static_cast<std::size_t>(da[i])] += 1.0;
    cb[static_cast<std::size_t>(db[i])] += 1.0;
  }
  const double ha = entropy(ca, n);
  const double hb = entropy(cb, n);
  if (ka == 1 || kb == 1) {
    // Dense relabeling makes "same partition" a plain equality test.
    return (ka == 1 && kb == 1 && da == db) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      const double nij = table[i * kb + j];
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (ca[i] * cb[j]));
    }
  }
  const double value = mi / ((ha + hb) / 2.0);
  return std::clamp(value, 0.0, 1.0);
}

double BenchCell::mean_time() const {
  if (times.empty()) return 0.0;
  double s = 0.0;
  for (double t : times) s += t;
  return s / static_cast<double>(times.size());
}

std::optional<double> BenchCell::mean_nmi() const {
  if (nmis.empty()) return std::nullopt;
  double s = 0.0;
  for (double v : nmis) s += v;
  return s / static_cast<double>(nmis.size());
}

std::vector<int> run_baseline(const std::string& command, const std::string& csv_path,
                              std::size_t k) {
  const std::string cmd = command + " " + shell_quote(csv_path) + " " + std::to_string(k);
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) fail(ErrorCode::kConfig, "cannot start baseline command");
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = ::pclose(pipe);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  require(code == 0, ErrorCode::kData,
          "baseline command exited with status " + std::to_string(code));
  std::vector<int> labels;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      fail(ErrorCode::kData, "baseline printed a non-integer label '" + line + "'");
    }
  }
  return labels;
}

BenchReport bench(const std::vector<BenchDataset>& datasets, const std::vector<BenchConfig>& configs,
                  const BenchOptions& options) {
  require(options.repetitions >= 1, ErrorCode::kConfig, "repetitions must be >= 1");
  using Clock = std::chrono::steady_clock;
  BenchReport report;
  for (const BenchDataset& ds : datasets) {
    require(ds.data != nullptr, ErrorCode::kData, "dataset '" + ds.name + "' is not loaded");
    const auto& truth = ds.data->labels();
    std::optional<std::size_t> true_k;
    if (truth) true_k = std::set<int>(truth->begin(), truth->end()).size();

    for (const BenchConfig& bc : configs) {
      BenchCell cell;
      cell.algorithm = bc.name.empty() ? std::string(algo::to_string(bc.config.algorithm)) : bc.name;
      cell.dataset = ds.name;
      cell.rows = ds.data->rows();
      cell.cols = ds.data->cols();
      algo::AlgorithmConfig config = bc.config;
      if (!config.max_clusters && needs_k(config.algorithm)) {
        if (!true_k) {
          cell.warning = "no max_clusters and no ground truth to supply one";
          cell.config = serial::config_to_json(config);
          report.cells.push_back(std::move(cell));
          continue;
        }
        config.max_clusters = true_k;
      }
      cell.config = serial::config_to_json(config);
      const std::uint64_t base_seed = config.seed;
      auto run_once = [&](std::size_t rep) {
        algo::AlgorithmConfig c = config;
        c.seed = base_seed + rep;
        c.projection.seed = c.seed;
        const auto start = Clock::now();
        algo::FitResult fitted = algo::fit(c, ds.data);
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        if (fitted.status == algo::FitStatus::kStoppedEarly && cell.warning.empty()) {
          cell.warning = fitted.warning;
        }
        return std::make_pair(elapsed.count(), std::move(fitted.labels));
      };
      if (options.warmup) (void)run_once(0);
      for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        auto [seconds, labels] = run_once(rep);
        cell.times.push_back(seconds);
        if (truth) cell.nmis.push_back(nmi(labels, *truth));
      }
      cell.repetitions = cell.times.size();
      report.cells.push_back(std::move(cell));
    }

    if (options.baseline_command) {
      BenchCell cell;
      cell.algorithm = options.baseline_name;
      cell.dataset = ds.name;
      cell.rows = ds.data->rows();
      cell.cols = ds.data->cols();
      cell.config = {{"command", *options.baseline_command}};
      std::string path = ds.source_path;
      std::filesystem::path temp;
      if (path.empty()) {
        temp = std::filesystem::temp_directory_path() /
               ("divclust-bench-" + std::to_string(::getpid()) + ".csv");
        io::save_matrix(temp.string(), *ds.data, {.delimiter = ',', .include_labels = false});
        path = temp.string();
      }
      const std::size_t k = true_k.value_or(2);
      auto run_once = [&] {
        const auto start = Clock::now();
        std::vector<int> labels = run_baseline(*options.baseline_command, path, k);
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        return std::make_pair(elapsed.count(), std::move(labels));
      };
      try {
        if (options.warmup) (void)run_once();
        for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
          auto [seconds, labels] = run_once();
          cell.times.push_back(seconds);
          if (truth) {
            require(labels.size() == truth->size(), ErrorCode::kData,
                    "baseline returned " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(truth->size()) + " rows");
            cell.nmis.push_back(nmi(labels, *truth));
          }
        }
      } catch (const Error& e) {
        cell.warning = e.what();
      }
      if (!temp.empty()) std::filesystem::remove(temp);
      cell.repetitions = cell.times.size();
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const BenchCell& c : report.cells) {
    nlohmann::json j{{"algorithm", c.algorithm},
                     {"dataset", c.dataset},
                     {"shape", {c.rows, c.cols}},
                     {"repetitions", c.repetitions},
                     {"times", c.times},
                     {"mean_time", c.mean_time()},
                     {"config", c.config}};
    const auto m = c.mean_nmi();
    j["nmis"] = c.nmis;
    j["mean_nmi"] = m ? nlohmann::json(*m) : nlohmann::json(nullptr);
    if (!c.warning.empty()) j["warning"] = c.warning;
    cells.push_back(std::move(j));
  }
  return {{"format", "divclust.bench"}, {"version", 1}, {"cells", std::move(cells)}};
}

std::string to_text_table(const BenchReport& report) {
  std::ostringstream out;
  std::string current;
  bool first = true;
  char line[160];
  for (const BenchCell& c : report.cells) {
    if (first || c.dataset != current) {
      if (!first) out << '\n';
      first = false;
      current = c.dataset;
      out << c.dataset << " (" << c.rows << ", " << c.cols << ")\n";
      std::snprintf(line, sizeof line, "%-12s %10s %8s\n", "algorithm", "time", "nmi");
      out << line;
    }
    const auto m = c.mean_nmi();
    char nmi_text[32];
    if (m) {
      std::snprintf(nmi_text, sizeof nmi_text, "%.2f", *m);
    } else {
      std::snprintf(nmi_text, sizeof nmi_text, "-");
    }
    if (c.repetitions == 0) {
      std::snprintf(line, sizeof line, "%-12s %10s %8s\n", c.algorithm.c_str(), "-", nmi_text);
    } else {
      std::snprintf(line, sizeof line, "%-12s %10.4f %8s\n", c.algorithm.c_str(), c.mean_time(),
                    nmi_text);
    }
    out << line;
  }
  return out.str();
}

}  // namespace divclust::eval
