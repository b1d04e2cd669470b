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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divclust/matrix.hpp"

namespace divclust::io {

enum class Delimiter { kAuto, kComma, kTab };

struct LoadOptions {
  Delimiter delimiter = Delimiter::kAuto;  // auto: tab if the first line has one
  bool header = false;
  std::optional<std::size_t> label_column;  // 0-based, removed from the features
  std::optional<std::string> label_file;    // one label per line
};

/// Row numbers in errors are 1-based file lines; columns are 1-based cells.
DataMatrix load_matrix(const std::string& path, const LoadOptions& options = {});
DataMatrix parse_matrix(std::string_view text, const LoadOptions& options = {});

/// Labels are mapped to 0, 1, ... in order of first appearance.
std::vector<int> parse_labels(std::string_view text);
std::vector<int> load_labels(const std::string& path);

struct SaveOptions {
  char delimiter = ',';
  bool include_labels = true;  // as column 0, when the matrix has labels
};

/// Values use the shortest decimal form that parses back to the same double.
std::string format_matrix(const DataMatrix& data, const SaveOptions& options = {});
void save_matrix(const std::string& path, const DataMatrix& data, const SaveOptions& options = {});
std::string format_labels(const std::vector<int>& labels);
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

DataMatrix make_blobs(std::size_t n, std::size_t d, std::size_t k, double separation,
                      double spread, std::uint64_t seed);
/// The generating centers of make_blobs for the same arguments.
Matrix blob_centers(std::size_t d, std::size_t k, double separation, std::uint64_t seed);

struct RingOptions {
  double inner_radius = 1.0;
  double outer_radius = 3.0;
  double noise = 0.1;  // radial Gaussian jitter
};

/// Two concentric rings in the plane, label 0 inside and 1 outside.
DataMatrix make_rings(std::size_t n, std::uint64_t seed, const RingOptions& options = {});

/// Appends round(fraction * n) points drawn uniformly from the bounding box
/// of `data`, labelled -1.
DataMatrix add_uniform_outliers(const DataMatrix& data, double fraction, std::uint64_t seed);

}  // namespace divclust::io
