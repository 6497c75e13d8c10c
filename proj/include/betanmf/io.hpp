// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "betanmf/types.hpp"

namespace betanmf {

// Plain-CSV matrix interchange: one matrix row per line, comma-separated
// decimal reals. Saved at 17 significant digits so a save/load round trip is
// entrywise exact. Loading rejects negative entries.

inline void save_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    long col_no = 0;
    while (std::getline(ss, cell, ',')) {
      ++col_no;
      try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("parse error at line " + std::to_string(line_no) +
                                    ", column " + std::to_string(col_no) + " of " + path);
      }
      if (row.back() < 0.0)
        throw std::domain_error("negative entry at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col_no) + " of " + path);
    }
    if (row.empty())
      throw std::invalid_argument("empty row at line " + std::to_string(line_no) + " of " + path);
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("ragged row at line " + std::to_string(line_no) + " of " + path +
                                  ": expected " + std::to_string(rows.front().size()) +
                                  " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "empty matrix file: " + path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace betanmf
