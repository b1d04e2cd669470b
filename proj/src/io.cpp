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

#include "divclust/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

#include "divclust/error.hpp"
#include "divclust/prng.hpp"

namespace divclust::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

class LabelMap {
 public:
  int id(std::string_view name) {
    const auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<int>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<std::string, int> ids_;
};

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back({number, line});
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kData, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DataMatrix parse_matrix(std::string_view text, const LoadOptions& options) {
  const std::vector<Line> lines = content_lines(text);
  char delim = ',';
  if (options.delimiter == Delimiter::kTab) {
    delim = '\t';
  } else if (options.delimiter == Delimiter::kAuto && !lines.empty() &&
             lines.front().text.find('\t') != std::string_view::npos) {
    delim = '\t';
  }

  std::size_t first = options.header ? 1 : 0;
  require(lines.size() > first, ErrorCode::kData, "no data rows");

  std::optional<std::size_t> width;
  std::vector<double> values;
  std::vector<int> labels;
  LabelMap label_map;
  for (std::size_t li = first; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const auto cells = split_cells(line.text, delim);
    if (!width) {
      width = cells.size();
      if (options.label_column) {
        require(*options.label_column < *width, ErrorCode::kConfig,
                "label column " + std::to_string(*options.label_column) + " out of range");
        require(*width >= 2, ErrorCode::kData, "no feature columns besides the label column");
      }
    }
    if (cells.size() != *width) {
      fail(ErrorCode::kData, "parse error at row " + std::to_string(line.number) + ": expected " +
                                 std::to_string(*width) + " cells, found " +
                                 std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (options.label_column && c == *options.label_column) {
        labels.push_back(label_map.id(cells[c]));
        continue;
      }
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        fail(ErrorCode::kData, "parse error at row " + std::to_string(line.number) + ", column " +
                                   std::to_string(c + 1) + ": '" + std::string(cells[c]) +
                                   "' is not a finite number");
      }
      values.push_back(v);
    }
  }
  const std::size_t rows = lines.size() - first;
  const std::size_t cols = *width - (options.label_column ? 1 : 0);
  std::optional<std::vector<int>> label_vec;
  if (options.label_column) label_vec = std::move(labels);
  if (options.label_file) {
    require(!options.label_column, ErrorCode::kConfig,
            "use either a label column or a label file, not both");
    label_vec = load_labels(*options.label_file);
    require(label_vec->size() == rows, ErrorCode::kData,
            "label file has " + std::to_string(label_vec->size()) + " labels for " +
                std::to_string(rows) + " rows");
  }
  return DataMatrix(Matrix(rows, cols, std::move(values)), std::move(label_vec));
}

DataMatrix load_matrix(const std::string& path, const LoadOptions& options) {
  return parse_matrix(read_file(path), options);
}

std::vector<int> parse_labels(std::string_view text) {
  std::vector<int> labels;
  LabelMap map;
  for (const Line& line : content_lines(text)) labels.push_back(map.id(trim(line.text)));
  return labels;
}

std::vector<int> load_labels(const std::string& path) { return parse_labels(read_file(path)); }

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_matrix(const DataMatrix& data, const SaveOptions& options) {
  std::string out;
  const bool labels = options.include_labels && data.labels().has_value();
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (labels) {
      out += std::to_string((*data.labels())[r]);
      out += options.delimiter;
    }
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c > 0) out += options.delimiter;
      out += format_double(data(r, c));
    }
    out += '\n';
  }
  return out;
}

void save_matrix(const std::string& path, const DataMatrix& data, const SaveOptions& options) {
  write_file_atomic(path, format_matrix(data, options));
}

std::string format_labels(const std::vector<int>& labels) {
  std::string out;
  out.reserve(labels.size() * 3);
  for (int label : labels) {
    out += std::to_string(label);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kData, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      fail(ErrorCode::kData, "write failed for '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kData, "cannot replace '" + path + "'");
  }
}

Matrix blob_centers(std::size_t d, std::size_t k, double separation, std::uint64_t seed) {
  require(d >= 1 && k >= 1, ErrorCode::kConfig, "blobs need d >= 1 and k >= 1");
  require(separation > 0.0, ErrorCode::kConfig, "separation must be positive");
  Matrix centers(k, d);
  if (k == 1) return centers;

  SeededPrng rng(derive_seed(seed, 0xB10B));
  // Directions: Gram-Schmidt on Gaussian draws while d allows, then plain
  // random unit vectors.
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> v(d);
    for (;;) {
      for (double& x : v) x = rng.normal();
      if (dirs.size() < d) {
        for (const auto& u : dirs) {
          double p = 0.0;
          for (std::size_t j = 0; j < d; ++j) p += u[j] * v[j];
          for (std::size_t j = 0; j < d; ++j) v[j] -= p * u[j];
        }
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (double& x : v) x /= norm;
        break;
      }
    }
    dirs.push_back(std::move(v));
  }
  // Radii grow geometrically so the between-center spectrum has distinct
  // eigenvalues; equal radii make every direction in the span equally
  // principal.
  constexpr double kRadiusGrowth = 1.5;
  double radius = 1.0;
  for (std::size_t i = 0; i < k; ++i, radius *= kRadiusGrowth) {
    for (std::size_t j = 0; j < d; ++j) centers(i, j) = radius * dirs[i][j];
  }
  double min_dist = INFINITY;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = centers(a, j) - centers(b, j);
        s += diff * diff;
      }
      min_dist = std::min(min_dist, std::sqrt(s));
    }
  }
  const double factor = separation / min_dist;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) centers(i, j) *= factor;
  }
  return centers;
}

DataMatrix make_blobs(std::size_t n, std::size_t d, std::size_t k, double separation,
                      double spread, std::uint64_t seed) {
  require(n >= k, ErrorCode::kConfig, "make_blobs needs n >= k");
  require(spread > 0.0, ErrorCode::kConfig, "spread must be positive");
  const Matrix centers = blob_centers(d, k, separation, seed);
  SeededPrng rng(derive_seed(seed, 0x5A3F));
  Matrix values(n, d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % k;
    labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < d; ++j) values(i, j) = centers(c, j) + spread * rng.normal();
  }
  return DataMatrix(std::move(values), std::move(labels));
}

DataMatrix make_rings(std::size_t n, std::uint64_t seed, const RingOptions& options) {
  require(n >= 2, ErrorCode::kConfig, "make_rings needs n >= 2");
  require(options.inner_radius > 0.0 && options.outer_radius > options.inner_radius,
          ErrorCode::kConfig, "ring radii must satisfy 0 < inner < outer");
  SeededPrng rng(derive_seed(seed, 0x121C));
  Matrix values(n, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool outer = i % 2 == 1;
    const double r = (outer ? options.outer_radius : options.inner_radius) + options.noise * rng.normal();
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    values(i, 0) = r * std::cos(theta);
    values(i, 1) = r * std::sin(theta);
    labels[i] = outer ? 1 : 0;
  }
  return DataMatrix(std::move(values), std::move(labels));
}

DataMatrix add_uniform_outliers(const DataMatrix& data, double fraction, std::uint64_t seed) {
  require(fraction >= 0.0, ErrorCode::kConfig, "outlier fraction must be nonnegative");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<double> lo(d, INFINITY);
  std::vector<double> hi(d, -INFINITY);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], data(i, j));
      hi[j] = std::max(hi[j], data(i, j));
    }
  }
  Matrix values(n + m, d);
  std::copy(data.matrix().values().begin(), data.matrix().values().end(), values.data());
  SeededPrng rng(derive_seed(seed, 0x0071));
  for (std::size_t i = n; i < n + m; ++i) {
    for (std::size_t j = 0; j < d; ++j) values(i, j) = rng.uniform(lo[j], hi[j]);
  }
  std::vector<int> labels = data.labels().value_or(std::vector<int>(n, 0));
  labels.resize(n + m, -1);
  return DataMatrix(std::move(values), std::move(labels));
}

}  // namespace divclust::io
