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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "divclust/algorithms.hpp"
#include "divclust/matrix.hpp"

namespace divclust::eval {

/// Mutual information over the arithmetic mean of the two entropies, natural
/// logs. When an entropy is zero the score is 1 if both labelings are the
/// same partition and 0 otherwise.
double nmi(std::span<const int> a, std::span<const int> b);

struct BenchDataset {
  std::string name;
  std::shared_ptr<const DataMatrix> data;
  std::string source_path;  // handed to the baseline command; empty = write a temp CSV
};

struct BenchConfig {
  std::string name;
  algo::AlgorithmConfig config;
};

struct BenchOptions {
  std::size_t repetitions = 1;
  bool warmup = true;
  std::optional<std::string> baseline_command;  // invoked as: <cmd> <csv path> <k>
  std::string baseline_name = "baseline";
};

struct BenchCell {
  std::string algorithm;
  std::string dataset;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> times;  // seconds, one per repetition
  std::vector<double> nmis;   // empty when the dataset has no labels
  std::size_t repetitions = 0;
  nlohmann::json config;
  std::string warning;

  double mean_time() const;
  std::optional<double> mean_nmi() const;
};

struct BenchReport {
  std::vector<BenchCell> cells;
};

/// Repetition r runs with seed = config.seed + r. Fixed-k algorithms without
/// max_clusters get the number of distinct ground-truth labels.
BenchReport bench(const std::vector<BenchDataset>& datasets, const std::vector<BenchConfig>& configs,
                  const BenchOptions& options);

nlohmann::json to_json(const BenchReport& report);
std::string to_text_table(const BenchReport& report);

/// Runs `<command> <csv_path> <k>` and reads one integer label per output line.
std::vector<int> run_baseline(const std::string& command, const std::string& csv_path,
                              std::size_t k);

}  // namespace divclust::eval
