// Copyright 2025 The fsiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fsiv/harness.hpp"

namespace fsiv::harness {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& cell, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw NonNumericCell(line, column, cell);
  return value;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path);
  return buf.str();
}

Dataset ingest_csv(const std::string& path) {
  const std::string content = read_file(path);

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, 1, "empty file");

  const std::vector<std::string> header = split_line(lines[0]);
  if (header.size() < 3) throw MissingColumn(header.size() < 2 ? "x" : "z1");
  if (header[0] != "y") throw MissingColumn("y");
  if (header[1] != "x") throw MissingColumn("x");
  const std::size_t p = header.size() - 2;
  for (std::size_t j = 0; j < p; ++j) {
    const std::string expected = "z" + std::to_string(j + 1);
    if (header[j + 2] != expected) throw MissingColumn(expected);
  }

  const std::size_t n = lines.size() - 1;
  if (n < 2) throw ParseError(lines.size(), 1, "expected at least 2 data rows");

  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(n));
  data.x.resize(static_cast<Eigen::Index>(n));
  data.Z.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    const std::vector<std::string> cells = split_line(lines[i + 1]);
    if (cells.size() != p + 2) {
      throw ParseError(line_no, cells.size() < p + 2 ? cells.size() + 1 : p + 3,
                       "expected " + std::to_string(p + 2) + " cells, found " +
                           std::to_string(cells.size()));
    }
    const auto col = static_cast<Eigen::Index>(i);
    data.y(col) = parse_cell(cells[0], line_no, 1);
    data.x(col) = parse_cell(cells[1], line_no, 2);
    for (std::size_t j = 0; j < p; ++j) {
      data.Z(static_cast<Eigen::Index>(j), col) = parse_cell(cells[j + 2], line_no, j + 3);
    }
  }
  return data;
}

void export_csv(const std::string& path, const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                const Eigen::MatrixXd& Z) {
  if (y.size() != x.size() || Z.cols() != x.size()) {
    throw DimensionMismatch("column lengths disagree");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);

  out << "y,x";
  for (Eigen::Index j = 0; j < Z.rows(); ++j) out << ",z" << (j + 1);
  out << "\n";

  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    put(y(i));
    out << ',';
    put(x(i));
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
      out << ',';
      put(Z(j, i));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace fsiv::harness
