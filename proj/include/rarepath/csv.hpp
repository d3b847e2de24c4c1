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

#ifndef RAREPATH_CSV_HPP
#define RAREPATH_CSV_HPP

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rarepath::csv {

/// Shortest round-trip text for a double (%.17g); "inf"/"-inf"/"nan" otherwise.
std::string format_real(double value);
std::string format_int(long long value);

void write_row(std::ostream& out, std::initializer_list<std::string_view> cells);
void write_row(std::ostream& out, const std::vector<std::string>& cells);

/// Reads a purely numeric CSV; the first line is skipped when `has_header`.
std::vector<std::vector<double>> read_numeric(std::istream& in, bool has_header);

}  // namespace rarepath::csv

#endif  // RAREPATH_CSV_HPP
