// Copyright 2026 The rarepath Authors
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

#include "rarepath/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "rarepath/error.hpp"

namespace rarepath::csv {

std::string format_real(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string format_int(long long value) { return std::to_string(value); }

namespace {
template <class Range>
void write_cells(std::ostream& out, const Range& cells) {
  bool first = true;
  for (const auto& cell : cells) {
    if (!first) {
      out << ',';
    }
    out << cell;
    first = false;
  }
  out << '\n';
}
}  // namespace

void write_row(std::ostream& out, std::initializer_list<std::string_view> cells) {
  write_cells(out, cells);
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) { write_cells(out, cells); }

std::vector<std::vector<double>> read_numeric(std::istream& in, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if ((has_header && line_no == 1) || line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        fail(ErrorCode::kInvalidArgument,
             "csv line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rarepath::csv
